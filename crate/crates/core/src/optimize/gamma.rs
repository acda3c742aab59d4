//! Resolution of the relay split `gamma` from the secrecy constraint.

use crate::awgn::{rate, Coding, SchemeParams, Scenario};
use crate::channel::relay_combined;
use crate::scalar::log2_1p;

/// Points of the bracket scan used when the residual is not known to be monotone.
pub const SCAN_POINTS: usize = 200;
/// Target accuracy of the secrecy equality after bisection.
pub const GAMMA_RESIDUAL_TOL: f64 = 1e-10;

/// Secrecy residual as a function of `gamma` with everything else fixed.
pub(crate) struct Probe<'a> {
    sc: &'a Scenario<f64>,
    p: SchemeParams<f64>,
    coding: Coding,
    /// Phase-3 contribution, independent of gamma.
    phase3: f64,
    rhs: f64,
}

impl<'a> Probe<'a> {
    pub(crate) fn new(sc: &'a Scenario<f64>, p: &SchemeParams<f64>, coding: Coding) -> Self {
        let g = &sc.gains;
        let (c11, c12) = relay_combined(g, p.relay_power_phase3(), sc.p1);
        let j3 = p.jam_power_phase3();
        let t9 = log2_1p(c11.norm_sqr() * sc.p1 / (1.0 + g.c21.norm_sqr() * j3));
        let t10 = log2_1p(c12.norm_sqr() * sc.p1 / (1.0 + g.c22.norm_sqr() * j3));
        let rest = 1.0 - p.eta1;
        let (phase3, rhs) = match coding {
            Coding::Dpc => (p.eta3 * t10, rest * log2_1p(g.c12.norm_sqr() * sc.p1)),
            Coding::NoDpc => (p.eta3 * (t9 - t10), rest * sc.r_s1_target),
        };
        Self { sc, p: *p, coding, phase3, rhs }
    }

    /// DPC: signed equality residual. No DPC: secrecy slack.
    pub(crate) fn residual(&self, gamma: f64) -> f64 {
        let g = &self.sc.gains;
        let p = self.p.with_gamma(gamma);
        let p1 = self.sc.p1;
        let (c11, c12) = relay_combined(g, p.relay_power_phase2(), p1);
        let j2 = p.jam_power_phase2();
        let pu = p.secondary_power();
        let n = 1.0 + g.c22.norm_sqr() * j2;
        let s = c12.norm_sqr() * p1;
        match self.coding {
            Coding::Dpc => {
                let u = g.c22.norm_sqr() * pu;
                p.eta2 * log2_1p(s / (n + u)) + self.phase3 - self.rhs
            }
            Coding::NoDpc => {
                let t3 = log2_1p(c11.norm_sqr() * p1 / (1.0 + g.c21.norm_sqr() * (j2 + pu)));
                let t6 = log2_1p(s / n);
                (p.eta2 * (t3 - t6) + self.phase3).max(0.0) - self.rhs
            }
        }
    }
}

/// Outcome of resolving gamma for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum GammaOutcome {
    Found(f64),
    /// No admissible gamma; the value measures how far the point is from feasibility.
    Violation(f64),
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> (f64, f64) {
    let mut s_lo = f_lo.signum();
    let mut best = (lo, f_lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm == 0.0 || hi - lo <= 1e-16 {
            break;
        }
        if fm.signum() == s_lo {
            lo = mid;
            s_lo = fm.signum();
        } else {
            hi = mid;
        }
        if best.1.abs() <= GAMMA_RESIDUAL_TOL * 1e-2 {
            break;
        }
    }
    let f_hi = f(hi);
    if f_hi.abs() < best.1.abs() {
        best = (hi, f_hi);
    }
    best
}

/// Roots of the DPC secrecy equality in ascending order, each checked against
/// the reliability constraint; the first admissible one wins.
fn resolve_dpc(sc: &Scenario<f64>, p: &SchemeParams<f64>, tol: f64) -> GammaOutcome {
    let probe = Probe::new(sc, p, Coding::Dpc);
    let f = |g: f64| probe.residual(g);
    let reliable = |g: f64| rate(sc, &p.with_gamma(g), Coding::Dpc).residual_reliability;
    let f0 = f(0.0);
    if f0.abs() <= GAMMA_RESIDUAL_TOL {
        let r = reliable(0.0);
        return if r >= -tol { GammaOutcome::Found(0.0) } else { GammaOutcome::Violation(-r) };
    }
    let monotone = sc.gains.is_co_phased();
    let grid: Vec<f64> = if monotone {
        vec![0.0, 1.0]
    } else {
        (0..SCAN_POINTS).map(|k| k as f64 / (SCAN_POINTS - 1) as f64).collect()
    };
    let mut prev = (grid[0], f0);
    let mut closest = f0.abs();
    let mut worst_rel = f64::INFINITY;
    for &g in &grid[1..] {
        let fg = f(g);
        closest = closest.min(fg.abs());
        if fg.abs() <= GAMMA_RESIDUAL_TOL || fg.signum() != prev.1.signum() {
            let (root, res) = if fg.abs() <= GAMMA_RESIDUAL_TOL { (g, fg) } else { bisect(&f, prev.0, g, prev.1) };
            if res.abs() <= tol {
                let r = reliable(root);
                if r >= -tol {
                    return GammaOutcome::Found(root);
                }
                worst_rel = worst_rel.min(-r);
            }
        }
        prev = (g, fg);
    }
    if worst_rel.is_finite() {
        GammaOutcome::Violation(worst_rel)
    } else {
        GammaOutcome::Violation(closest)
    }
}

/// Smallest gamma meeting the no-DPC secrecy inequality; the secondary rate
/// decreases in gamma, so this is the best admissible choice.
fn resolve_no_dpc(sc: &Scenario<f64>, p: &SchemeParams<f64>) -> GammaOutcome {
    let probe = Probe::new(sc, p, Coding::NoDpc);
    let f = |g: f64| probe.residual(g);
    let f0 = f(0.0);
    if f0 >= 0.0 {
        return GammaOutcome::Found(0.0);
    }
    let mut prev = (0.0, f0);
    let mut best = f0;
    for k in 1..SCAN_POINTS {
        let g = k as f64 / (SCAN_POINTS - 1) as f64;
        let fg = f(g);
        best = best.max(fg);
        if fg >= 0.0 {
            let (mut lo, mut hi) = (prev.0, g);
            for _ in 0..200 {
                if hi - lo <= 1e-16 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if f(mid) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return GammaOutcome::Found(hi);
        }
        prev = (g, fg);
    }
    GammaOutcome::Violation(-best)
}

pub(crate) fn resolve(sc: &Scenario<f64>, p: &SchemeParams<f64>, coding: Coding, tol: f64) -> GammaOutcome {
    match coding {
        Coding::Dpc => resolve_dpc(sc, p, tol),
        Coding::NoDpc => resolve_no_dpc(sc, p),
    }
}

/// Relay split satisfying the secrecy constraint with every other parameter fixed.
///
/// DPC: the smallest root of the equality residual (to 1e-8), or `None` when
/// the residual does not change sign on `[0, 1]`. No DPC: the smallest gamma
/// meeting the inequality. The optimizer additionally requires U1 to decode at
/// the chosen root and moves on to the next root otherwise.
pub fn resolve_gamma(sc: &Scenario<f64>, partial: &SchemeParams<f64>, coding: Coding) -> Option<f64> {
    match resolve(sc, partial, coding, f64::INFINITY) {
        GammaOutcome::Found(g) => Some(g),
        GammaOutcome::Violation(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::awgn::{dpc_rate, eta1_min, no_dpc_rate};
    use crate::channel::ChannelGains;
    use num_complex::Complex;

    fn sc() -> Scenario<f64> {
        Scenario::new(ChannelGains::real(1.0, 0.9, 0.05, 0.5, 10.0).unwrap(), 10.0, 20.0).unwrap()
    }

    #[test]
    fn silent_secondary_resolves_to_zero() {
        let s = sc();
        let p = SchemeParams::silent(eta1_min(&s).unwrap(), 0.4).unwrap();
        assert_eq!(resolve_gamma(&s, &p, Coding::Dpc), Some(0.0));
    }

    #[test]
    fn residual_positive_everywhere_gives_none() {
        // huge phase-3 relay towards U2 leaks more than allowed for every gamma
        let s = sc();
        let e1 = eta1_min(&s).unwrap();
        let p = SchemeParams::new(e1, 0.3, 0.0, 0.0, 0.0, 1.0, 40.0).unwrap();
        let probe = Probe::new(&s, &p, Coding::Dpc);
        assert!(probe.residual(0.0) > 0.0 && probe.residual(1.0) > 0.0);
        assert_eq!(resolve_gamma(&s, &p, Coding::Dpc), None);
    }

    #[test]
    fn round_trip_through_rate_evaluation() {
        let s = sc();
        let e1 = eta1_min(&s).unwrap();
        let p = SchemeParams::new(e1, 0.5, 0.0, 0.0, 0.0, 30.0, 0.0).unwrap();
        let g = resolve_gamma(&s, &p, Coding::Dpc).expect("root exists");
        let r = dpc_rate(&s, &p.with_gamma(g));
        assert!(r.residual_secrecy.abs() <= 1e-8, "{}", r.residual_secrecy);
    }

    #[test]
    fn no_dpc_gamma_is_the_smallest_admissible() {
        // T2 near U1: relaying helps U1 more than U2
        let g = ChannelGains::real(1.0, 0.9, 0.8, 0.3, 10.0).unwrap();
        let s = Scenario::new(g, 10.0, 20.0).unwrap();
        let e1 = eta1_min(&s).unwrap();
        let p = SchemeParams::new(e1, 0.5, 0.0, 0.0, 0.0, 20.0, 0.0).unwrap();
        let g = resolve_gamma(&s, &p, Coding::NoDpc).expect("admissible gamma");
        assert!(g > 0.0);
        assert!(no_dpc_rate(&s, &p.with_gamma(g)).feasible);
        if g > 1e-3 {
            assert!(!no_dpc_rate(&s, &p.with_gamma(g - 1e-3)).feasible);
        }
    }

    #[test]
    fn complex_gains_use_the_scan() {
        let g = ChannelGains::new(
            Complex::new(1.0, 0.0),
            Complex::from_polar(0.5, 2.5),
            Complex::from_polar(0.6, 0.3),
            Complex::from_polar(0.8, -1.0),
            Complex::new(6.0, 0.0),
        )
        .unwrap();
        let s = Scenario::new(g, 10.0, 10.0).unwrap();
        let e1 = eta1_min(&s).unwrap();
        let p = SchemeParams::new(e1, 0.5, 0.1, 0.0, 0.0, 20.0, 0.0).unwrap();
        let probe = Probe::new(&s, &p, Coding::Dpc);
        match resolve_gamma(&s, &p, Coding::Dpc) {
            Some(g) => assert!(dpc_rate(&s, &p.with_gamma(g)).residual_secrecy.abs() <= 1e-8),
            None => assert!((0..=100).all(|k| probe.residual(k as f64 / 100.0) != 0.0)),
        }
    }
}
