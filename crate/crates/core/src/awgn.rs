//! Closed-form AWGN rates for the three-phase schemes (with and without
//! dirty-paper coding), the single-phase baseline and the four-phase split.
//!
//! All logarithms are base 2; rates are in bits per channel use.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::{equivalent_channels, relay_combined, ChannelGains};
use crate::error::{Error, Result};
use crate::scalar::{log2_1p, log2_ratio, pos, Real};

/// Tolerance used for every feasibility decision on constraint residuals.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Tolerance on time fractions summing to one and on the power budget.
pub const FRACTION_TOL: f64 = 1e-9;

/// `C(x) = log2(1 + x)` for `x >= 0`.
pub fn capacity<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero()) {
        return Err(Error::Domain(format!("capacity argument must be nonnegative, got {x}")));
    }
    Ok(log2_1p(x))
}

/// Decision vector of the three-phase schemes.
///
/// `eta1` listening, `eta2` secondary transmission with relaying and jamming,
/// `eta3` clean relaying with jamming. `rho*` is the jamming share of the
/// phase power, `gamma` the relay share of the non-jamming phase-2 power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams<T> {
    pub eta1: T,
    pub eta2: T,
    pub eta3: T,
    pub rho2: T,
    pub rho3: T,
    pub gamma: T,
    pub p2_2: T,
    pub p2_3: T,
}

impl<T: Real> SchemeParams<T> {
    /// Builds a parameter point; `eta3` is the remainder `1 - eta1 - eta2`.
    pub fn new(eta1: T, eta2: T, rho2: T, rho3: T, gamma: T, p2_2: T, p2_3: T) -> Result<Self> {
        let mut eta3 = T::one() - eta1 - eta2;
        if eta3 < T::zero() && eta3 > -T::tol(FRACTION_TOL) {
            eta3 = T::zero();
        }
        let p = Self { eta1, eta2, eta3, rho2, rho3, gamma, p2_2, p2_3 };
        p.validate()?;
        Ok(p)
    }

    /// T2 silent in every phase.
    pub fn silent(eta1: T, eta2: T) -> Result<Self> {
        let z = T::zero();
        Self::new(eta1, eta2, z, z, z, z, z)
    }

    /// Range and simplex checks. `rho2 = 1` is accepted as the all-jamming boundary.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: T| {
            if v >= T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{name} = {v} outside [0, 1]")))
            }
        };
        if !(self.eta1 > T::zero() && self.eta1 < T::one()) {
            return Err(Error::Invalid(format!("eta1 = {} outside (0, 1)", self.eta1)));
        }
        if !(self.eta2 >= T::zero()) || !(self.eta3 >= T::zero()) {
            return Err(Error::Invalid(format!("negative phase fraction: eta2 = {}, eta3 = {}", self.eta2, self.eta3)));
        }
        let sum = self.eta1 + self.eta2 + self.eta3;
        if (sum - T::one()).abs() > T::tol(FRACTION_TOL) {
            return Err(Error::Invalid(format!("phase fractions sum to {sum}")));
        }
        unit("rho2", self.rho2)?;
        unit("rho3", self.rho3)?;
        unit("gamma", self.gamma)?;
        if !(self.p2_2 >= T::zero()) || !(self.p2_3 >= T::zero()) || !self.p2_2.is_finite() || !self.p2_3.is_finite() {
            return Err(Error::Invalid(format!("phase powers must be finite and nonnegative: {} {}", self.p2_2, self.p2_3)));
        }
        Ok(())
    }

    /// `eta2 P2(2) + eta3 P2(3)`.
    pub fn average_power(&self) -> T {
        self.eta2 * self.p2_2 + self.eta3 * self.p2_3
    }

    pub fn within_budget(&self, p2: T) -> bool {
        self.average_power() <= p2 + T::tol(FRACTION_TOL) * p2.max(T::one())
    }

    /// Power T2 spends forwarding the primary codeword in phase 2.
    pub fn relay_power_phase2(&self) -> T {
        (T::one() - self.rho2) * self.gamma * self.p2_2
    }

    /// Power T2 spends forwarding the primary codeword in phase 3.
    pub fn relay_power_phase3(&self) -> T {
        (T::one() - self.rho3) * self.p2_3
    }

    /// Power of the secondary codeword, `P_U2 = (1 - rho2)(1 - gamma) P2(2)`.
    pub fn secondary_power(&self) -> T {
        (T::one() - self.rho2) * (T::one() - self.gamma) * self.p2_2
    }

    pub fn jam_power_phase2(&self) -> T {
        self.rho2 * self.p2_2
    }

    pub fn jam_power_phase3(&self) -> T {
        self.rho3 * self.p2_3
    }

    /// Single-phase restriction: `eta3 = 0`, `eta2 = 1 - eta1`, no phase-3 power.
    pub fn single_phase(&self) -> Self {
        Self {
            eta2: T::one() - self.eta1,
            eta3: T::zero(),
            p2_3: T::zero(),
            rho3: T::zero(),
            ..*self
        }
    }

    pub fn with_gamma(&self, gamma: T) -> Self {
        Self { gamma, ..*self }
    }
}

/// Link gains plus power budgets and the primary secrecy rate to protect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    pub gains: ChannelGains<T>,
    pub p1: T,
    pub p2: T,
    pub r_s1_target: T,
}

impl<T: Real> Scenario<T> {
    /// Scenario with the target set to the T2-silent secrecy capacity.
    pub fn new(gains: ChannelGains<T>, p1: T, p2: T) -> Result<Self> {
        if !(p1 > T::zero()) || !p1.is_finite() {
            return Err(Error::Invalid(format!("p1 must be positive, got {p1}")));
        }
        if !(p2 >= T::zero()) || !p2.is_finite() {
            return Err(Error::Invalid(format!("p2 must be nonnegative, got {p2}")));
        }
        let mut sc = Self { gains, p1, p2, r_s1_target: T::zero() };
        sc.r_s1_target = baseline_secrecy_rate(&sc);
        Ok(sc)
    }

    pub fn with_target(mut self, r_s1_target: T) -> Result<Self> {
        if !(r_s1_target >= T::zero()) {
            return Err(Error::Invalid(format!("target secrecy rate must be nonnegative, got {r_s1_target}")));
        }
        self.r_s1_target = r_s1_target;
        Ok(self)
    }

    pub fn with_p2(mut self, p2: T) -> Result<Self> {
        if !(p2 >= T::zero()) {
            return Err(Error::Invalid(format!("p2 must be nonnegative, got {p2}")));
        }
        self.p2 = p2;
        Ok(self)
    }
}

/// Coding used by T2 for its own message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coding {
    /// Dirty-paper coding against the known primary codeword.
    Dpc,
    /// Plain Gaussian codebook; the primary signal is interference at U2.
    NoDpc,
}

/// The ten per-phase mutual information terms, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MiTerms<T> {
    /// I(V1;Y1), phase 1.
    pub i_v1_y1_ph1: T,
    /// I(V1;Y2), phase 1.
    pub i_v1_y2_ph1: T,
    /// I(V1;Y1'), phase 2.
    pub i_v1_y1_ph2: T,
    /// I(V1;Y2'|V2), phase 2.
    pub i_v1_y2_given_v2_ph2: T,
    /// I(V1,V2;Y2'), phase 2.
    pub i_v1v2_y2_ph2: T,
    /// I(V1;V2,Y2'), phase 2.
    pub i_v1_v2y2_ph2: T,
    /// I(V2;Y2'), phase 2.
    pub i_v2_y2_ph2: T,
    /// I(V1;V2).
    pub i_v1_v2: T,
    /// I(V1;Y1'), phase 3.
    pub i_v1_y1_ph3: T,
    /// I(V1;Y2'), phase 3.
    pub i_v1_y2_ph3: T,
}

impl<T: Real> MiTerms<T> {
    pub const NAMES: [&'static str; 10] = [
        "i_v1_y1_ph1",
        "i_v1_y2_ph1",
        "i_v1_y1_ph2",
        "i_v1_y2_given_v2_ph2",
        "i_v1v2_y2_ph2",
        "i_v1_v2y2_ph2",
        "i_v2_y2_ph2",
        "i_v1_v2",
        "i_v1_y1_ph3",
        "i_v1_y2_ph3",
    ];

    pub fn values(&self) -> [T; 10] {
        [
            self.i_v1_y1_ph1,
            self.i_v1_y2_ph1,
            self.i_v1_y1_ph2,
            self.i_v1_y2_given_v2_ph2,
            self.i_v1v2_y2_ph2,
            self.i_v1_v2y2_ph2,
            self.i_v2_y2_ph2,
            self.i_v1_v2,
            self.i_v1_y1_ph3,
            self.i_v1_y2_ph3,
        ]
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, T)> {
        Self::NAMES.into_iter().zip(self.values())
    }
}

/// Evaluation of one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport<T> {
    pub coding: Coding,
    pub r2: T,
    pub feasible: bool,
    /// Decoding slack at U1; must be nonnegative for the DPC scheme.
    pub residual_reliability: T,
    /// DPC: signed equality residual on the leaked information.
    /// No DPC: secrecy slack over `(1 - eta1) R_S1`, must be nonnegative.
    pub residual_secrecy: T,
    pub terms: MiTerms<T>,
    /// Costa inflation factor of the DPC auxiliary (0 without DPC).
    pub mmse_alpha: T,
    pub secondary_power: T,
}

/// Secrecy capacity of the primary link while T2 stays silent.
pub fn baseline_secrecy_rate<T: Real>(sc: &Scenario<T>) -> T {
    let g = &sc.gains;
    pos(log2_1p(g.c11.norm_sqr() * sc.p1) - log2_1p(g.c12.norm_sqr() * sc.p1))
}

/// Shortest listening fraction that lets T2 decode the primary message.
pub fn eta1_min<T: Real>(sc: &Scenario<T>) -> Result<T> {
    sc.gains.check_decodable()?;
    let g = &sc.gains;
    Ok(log2_1p(g.c11.norm_sqr() * sc.p1) / log2_1p(g.ctt.norm_sqr() * sc.p1))
}

fn quad<T: Real>(c: Complex<T>) -> T {
    c.norm_sqr()
}

fn evaluate<T: Real>(sc: &Scenario<T>, p: &SchemeParams<T>, coding: Coding) -> RateReport<T> {
    let g = &sc.gains;
    let p1 = sc.p1;
    let one = T::one();
    let h21 = quad(g.c21);
    let h22 = quad(g.c22);

    let (c11_p2, c12_p2) = relay_combined(g, p.relay_power_phase2(), p1);
    let (c11_p3, c12_p3) = relay_combined(g, p.relay_power_phase3(), p1);
    let pu = p.secondary_power();
    let j2 = p.jam_power_phase2();
    let j3 = p.jam_power_phase3();

    let t1 = log2_1p(quad(g.c11) * p1);
    let t2 = log2_1p(quad(g.c12) * p1);
    let t3 = log2_1p(quad(c11_p2) * p1 / (one + h21 * (j2 + pu)));

    // Phase 2 at U2 in received units: noise plus jamming `n`, primary `s`, secondary `u`.
    let n = one + h22 * j2;
    let s = quad(c12_p2) * p1;
    let u = h22 * pu;
    let t5 = log2_ratio(n + u + s, n);

    let (t4, t6, t7, t8, alpha, rate) = match coding {
        Coding::Dpc => {
            let alpha = u / (u + n);
            let t6 = log2_1p(s / (n + u));
            let (t7, t8) = if u > T::zero() {
                let var_v = u + alpha * alpha * s;
                let var_y = u + s + n;
                let om = one - alpha;
                let det = u * s * om * om + n * var_v;
                (log2_ratio(var_v * var_y, det), log2_1p(alpha * alpha * s / u))
            } else {
                (T::zero(), T::zero())
            };
            (t5 - t7, t6, t7, t8, alpha, log2_1p(u / n))
        }
        Coding::NoDpc => {
            let t7 = log2_1p(u / (n + s));
            let t4 = log2_1p(s / n);
            (t4, t4, t7, T::zero(), T::zero(), t7)
        }
    };

    let t9 = log2_1p(quad(c11_p3) * p1 / (one + h21 * j3));
    let t10 = log2_1p(quad(c12_p3) * p1 / (one + h22 * j3));

    let terms = MiTerms {
        i_v1_y1_ph1: t1,
        i_v1_y2_ph1: t2,
        i_v1_y1_ph2: t3,
        i_v1_y2_given_v2_ph2: t4,
        i_v1v2_y2_ph2: t5,
        i_v1_v2y2_ph2: t6,
        i_v2_y2_ph2: t7,
        i_v1_v2: t8,
        i_v1_y1_ph3: t9,
        i_v1_y2_ph3: t10,
    };

    let rest = one - p.eta1;
    let residual_reliability = p.eta2 * t3 + p.eta3 * t9 - rest * t1;
    let tol = T::tol(FEASIBILITY_TOL);
    let (residual_secrecy, constraints_ok) = match coding {
        Coding::Dpc => {
            let r = p.eta2 * t6 + p.eta3 * t10 - rest * t2;
            (r, r.abs() <= tol && residual_reliability >= -tol)
        }
        Coding::NoDpc => {
            let r = pos(p.eta2 * (t3 - t6) + p.eta3 * (t9 - t10)) - rest * sc.r_s1_target;
            (r, r >= -tol)
        }
    };

    let structural = p.validate().is_ok()
        && g.is_decodable()
        && p.within_budget(sc.p2)
        && eta1_min(sc).map(|e| p.eta1 >= e - T::tol(FRACTION_TOL)).unwrap_or(false);

    RateReport {
        coding,
        r2: p.eta2 * rate,
        feasible: structural && constraints_ok,
        residual_reliability,
        residual_secrecy,
        terms,
        mmse_alpha: alpha,
        secondary_power: pu,
    }
}

/// Three-phase scheme with dirty-paper coding at T2.
pub fn dpc_rate<T: Real>(sc: &Scenario<T>, p: &SchemeParams<T>) -> RateReport<T> {
    evaluate(sc, p, Coding::Dpc)
}

/// Three-phase scheme with a plain Gaussian codebook at T2.
pub fn no_dpc_rate<T: Real>(sc: &Scenario<T>, p: &SchemeParams<T>) -> RateReport<T> {
    evaluate(sc, p, Coding::NoDpc)
}

pub fn rate<T: Real>(sc: &Scenario<T>, p: &SchemeParams<T>, coding: Coding) -> RateReport<T> {
    evaluate(sc, p, coding)
}

/// Listening phase followed by a single secondary phase (no clean relaying).
pub fn single_phase_rate<T: Real>(sc: &Scenario<T>, p: &SchemeParams<T>, coding: Coding) -> RateReport<T> {
    evaluate(sc, &p.single_phase(), coding)
}

/// Phase-3 split for the four-phase comparison: a pure relay phase of length
/// `eta3_prime` at power `p2_3prime` and a pure jamming phase of length `eta4`
/// at power `p2_4`, against the three-phase `(eta3, rho3, p2_3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourPhaseSplit<T> {
    pub eta3: T,
    pub eta3_prime: T,
    pub eta4: T,
    pub p2_3prime: T,
    pub p2_4: T,
    pub rho3: T,
    pub p2_3: T,
}

impl<T: Real> FourPhaseSplit<T> {
    pub fn check(&self) -> Result<()> {
        let vals = [self.eta3, self.eta3_prime, self.eta4, self.p2_3prime, self.p2_4, self.p2_3];
        if vals.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::Invalid("four-phase split needs finite nonnegative entries".into()));
        }
        if !(self.rho3 >= T::zero() && self.rho3 <= T::one()) {
            return Err(Error::Invalid(format!("rho3 = {} outside [0, 1]", self.rho3)));
        }
        let tol = T::tol(FRACTION_TOL);
        if (self.eta3_prime + self.eta4 - self.eta3).abs() > tol {
            return Err(Error::Invalid(format!(
                "time link violated: eta3' + eta4 = {} but eta3 = {}",
                self.eta3_prime + self.eta4,
                self.eta3
            )));
        }
        let e3 = self.eta3 * self.p2_3;
        let e4 = self.eta3_prime * self.p2_3prime + self.eta4 * self.p2_4;
        if (e4 - e3).abs() > tol * e3.max(T::one()) {
            return Err(Error::Invalid(format!("energy link violated: {e4} vs {e3}")));
        }
        Ok(())
    }
}

/// Primary secrecy contributed by the post-secondary phases:
/// `(four-phase, three-phase)`.
pub fn four_phase_r1_terms<T: Real>(sc: &Scenario<T>, split: &FourPhaseSplit<T>) -> Result<(T, T)> {
    split.check()?;
    let g = &sc.gains;
    let p1 = sc.p1;
    let one = T::one();
    let (h21, h22) = (quad(g.c21), quad(g.c22));

    let (r11, r12) = relay_combined(g, split.p2_3prime, p1);
    let relay = log2_1p(quad(r11) * p1) - log2_1p(quad(r12) * p1);
    let jam = log2_1p(quad(g.c11) * p1 / (one + h21 * split.p2_4)) - log2_1p(quad(g.c12) * p1 / (one + h22 * split.p2_4));
    let r4 = split.eta3_prime * relay + split.eta4 * jam;

    let (m11, m12) = relay_combined(g, (one - split.rho3) * split.p2_3, p1);
    let j = split.rho3 * split.p2_3;
    let r3 = split.eta3 * (log2_1p(quad(m11) * p1 / (one + h21 * j)) - log2_1p(quad(m12) * p1 / (one + h22 * j)));
    Ok((r4, r3))
}

/// Time-weighted secrecy over three phases from per-phase `(I(U;Y1), I(U;Y2))` pairs.
pub fn three_phase_capacity_form<T: Real>(terms: &[(T, T); 3], fractions: &[T; 3]) -> Result<T> {
    if fractions.iter().any(|f| !(*f >= T::zero())) {
        return Err(Error::Usage("phase fractions must be nonnegative".into()));
    }
    let sum = fractions[0] + fractions[1] + fractions[2];
    if (sum - T::one()).abs() > T::tol(FRACTION_TOL) {
        return Err(Error::Usage(format!("phase fractions sum to {sum}, expected 1")));
    }
    Ok(terms
        .iter()
        .zip(fractions)
        .fold(T::zero(), |acc, (&(a, b), &f)| if f == T::zero() { acc } else { acc + f * (a - b) }))
}

/// Equivalent channels at a parameter point, re-exported for reporting.
pub fn report_channels<T: Real>(sc: &Scenario<T>, p: &SchemeParams<T>) -> Result<crate::channel::EquivalentChannels<T>> {
    equivalent_channels(&sc.gains, p, sc.p1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gap_gains() -> ChannelGains<f64> {
        ChannelGains::real(1.0, 0.9, 0.05, 0.5, 10.0).unwrap()
    }

    fn scenario(p2: f64) -> Scenario<f64> {
        Scenario::new(gap_gains(), 10.0, p2).unwrap()
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(0.0f64).unwrap(), 0.0);
        assert_relative_eq!(capacity(1.0f64).unwrap(), 1.0);
        assert_relative_eq!(capacity(10.0f64).unwrap(), 3.4594316186372973, epsilon = 1e-14);
        assert!(matches!(capacity(-0.1f64), Err(Error::Domain(_))));
    }

    #[test]
    fn baseline_rate_cases() {
        let sc = Scenario::new(ChannelGains::real(1.0, 0.81, 0.05, 0.5, 10.0).unwrap(), 10.0, 0.0).unwrap();
        assert_relative_eq!(baseline_secrecy_rate(&sc), (11.0f64 / 7.561).log2(), epsilon = 1e-14);
        assert!((baseline_secrecy_rate(&sc) - 0.5409).abs() < 5e-5);
        let strong = Scenario::new(ChannelGains::real(1.0, 1.2, 0.05, 0.5, 10.0).unwrap(), 10.0, 0.0).unwrap();
        assert_eq!(baseline_secrecy_rate(&strong), 0.0);
        let clean = Scenario::new(ChannelGains::real(1.0, 0.0, 0.05, 0.5, 10.0).unwrap(), 10.0, 0.0).unwrap();
        assert_relative_eq!(baseline_secrecy_rate(&clean), 11f64.log2());
    }

    #[test]
    fn eta1_cases() {
        assert!((eta1_min(&scenario(0.0)).unwrap() - 0.3471).abs() < 1e-4);
        let far = Scenario::new(ChannelGains::real(1.0, 0.9, 0.05, 0.5, 1e12).unwrap(), 10.0, 0.0).unwrap();
        assert!(eta1_min(&far).unwrap() < 0.05);
        let edge = Scenario::new(ChannelGains::real(1.0, 0.9, 0.05, 0.5, 1.0).unwrap(), 10.0, 0.0).unwrap();
        assert!(matches!(eta1_min(&edge), Err(Error::NotDecodable { .. })));
    }

    #[test]
    fn scheme_params_validation() {
        assert!(SchemeParams::new(0.3, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(SchemeParams::new(0.3, 0.4, 1.2, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(SchemeParams::new(0.0, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(SchemeParams::new(0.3, 0.4, 0.0, 0.0, 0.0, -1.0, 0.0).is_err());
        let p = SchemeParams::new(0.3, 0.7 + 1e-12, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(p.eta3, 0.0);
    }

    #[test]
    fn dpc_zero_rate_cases() {
        let sc = scenario(10.0);
        let e1 = eta1_min(&sc).unwrap();
        let no_time = SchemeParams::new(e1, 0.0, 0.0, 0.0, 0.5, 0.0, 10.0 / (1.0 - e1)).unwrap();
        assert_eq!(dpc_rate(&sc, &no_time).r2, 0.0);
        let all_jam = SchemeParams::new(e1, 0.5, 1.0, 0.0, 0.2, 5.0, 0.0).unwrap();
        assert_eq!(dpc_rate(&sc, &all_jam).r2, 0.0);
        let all_relay = SchemeParams::new(e1, 0.5, 0.0, 0.0, 1.0, 5.0, 0.0).unwrap();
        assert_eq!(dpc_rate(&sc, &all_relay).r2, 0.0);
    }

    #[test]
    fn silent_secondary_collapses_residuals() {
        let sc = scenario(10.0);
        let e1 = eta1_min(&sc).unwrap();
        let p = SchemeParams::silent(e1, 0.4).unwrap();
        for coding in [Coding::Dpc, Coding::NoDpc] {
            let r = rate(&sc, &p, coding);
            assert_eq!(r.r2, 0.0);
            assert!(r.residual_secrecy.abs() < 1e-12);
            assert!(r.residual_reliability.abs() < 1e-12);
            assert!(r.feasible);
        }
    }

    #[test]
    fn dpc_dominates_interfered_rate() {
        let sc = scenario(10.0);
        let e1 = eta1_min(&sc).unwrap();
        let p = SchemeParams::new(e1, 0.4, 0.2, 0.3, 0.4, 12.0, 5.0).unwrap();
        assert!(dpc_rate(&sc, &p).r2 >= no_dpc_rate(&sc, &p).r2);
    }

    #[test]
    fn no_dpc_matches_dpc_rate_as_primary_power_vanishes() {
        let mut sc = scenario(10.0);
        sc.p1 = 1e-9;
        // relayed power does not scale with p1, so the limit is taken without phase-2 relaying
        let p = SchemeParams::new(0.3, 0.4, 0.2, 0.3, 0.0, 12.0, 5.0).unwrap();
        assert_relative_eq!(dpc_rate(&sc, &p).r2, no_dpc_rate(&sc, &p).r2, epsilon = 1e-7);
    }

    #[test]
    fn dpc_terms_are_self_consistent() {
        let sc = scenario(20.0);
        let e1 = eta1_min(&sc).unwrap();
        let p = SchemeParams::new(e1, 0.45, 0.15, 0.25, 0.35, 18.0, 9.0).unwrap();
        let r = dpc_rate(&sc, &p);
        let t = r.terms;
        assert_relative_eq!(t.i_v2_y2_ph2 - t.i_v1_v2, r.r2 / p.eta2, epsilon = 1e-12);
        assert_relative_eq!(t.i_v1_v2y2_ph2, t.i_v1_v2 + t.i_v1_y2_given_v2_ph2, epsilon = 1e-12);
        assert_relative_eq!(t.i_v1v2_y2_ph2, t.i_v2_y2_ph2 + t.i_v1_y2_given_v2_ph2, epsilon = 1e-12);
        assert!(t.values().iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!(r.mmse_alpha > 0.0 && r.mmse_alpha < 1.0);
    }

    #[test]
    fn single_phase_equals_dpc_with_no_third_phase() {
        let sc = scenario(10.0);
        let e1 = eta1_min(&sc).unwrap();
        let p = SchemeParams::new(e1, 0.3, 0.1, 0.5, 0.6, 8.0, 3.0).unwrap();
        let sp = single_phase_rate(&sc, &p, Coding::Dpc);
        let direct = dpc_rate(&sc, &SchemeParams::new(e1, 1.0 - e1, 0.1, 0.0, 0.6, 8.0, 0.0).unwrap());
        assert_eq!(sp, direct);
    }

    #[test]
    fn four_phase_collapses() {
        let sc = scenario(10.0);
        let base = FourPhaseSplit { eta3: 0.3, eta3_prime: 0.3, eta4: 0.0, p2_3prime: 7.0, p2_4: 0.0, rho3: 0.0, p2_3: 7.0 };
        let (r4, r3) = four_phase_r1_terms(&sc, &base).unwrap();
        assert_eq!(r4, r3);
        let jam_only = FourPhaseSplit { eta3_prime: 0.0, eta4: 0.3, p2_3prime: 0.0, p2_4: 7.0, ..base };
        let (r4, _) = four_phase_r1_terms(&sc, &jam_only).unwrap();
        let expect = 0.3 * ((1.0f64 + 10.0 / (1.0 + 0.0025 * 7.0)).log2() - (1.0f64 + 8.1 / (1.0 + 0.25 * 7.0)).log2());
        assert_relative_eq!(r4, expect, epsilon = 1e-12);
        let broken = FourPhaseSplit { eta4: 0.1, ..base };
        assert!(four_phase_r1_terms(&sc, &broken).is_err());
        let wasteful = FourPhaseSplit { p2_3prime: 8.0, ..base };
        assert!(four_phase_r1_terms(&sc, &wasteful).is_err());
    }

    #[test]
    fn capacity_form_combiner() {
        let same = [(2.0, 0.5); 3];
        assert_relative_eq!(three_phase_capacity_form(&same, &[0.2, 0.3, 0.5]).unwrap(), 1.5);
        let skip = [(1.0, 0.2), (f64::NAN, 0.0), (3.0, 1.0)];
        assert_relative_eq!(three_phase_capacity_form(&skip, &[0.5, 0.0, 0.5]).unwrap(), 1.4);
        assert!(matches!(three_phase_capacity_form(&same, &[0.2, 0.2, 0.2]), Err(Error::Usage(_))));
    }

    #[test]
    fn single_precision_path() {
        let g = ChannelGains::<f32>::real(1.0, 0.9, 0.05, 0.5, 10.0).unwrap();
        let sc = Scenario::new(g, 10.0, 10.0).unwrap();
        let e1 = eta1_min(&sc).unwrap();
        assert!((e1 - 0.3471).abs() < 1e-4);
        let p = SchemeParams::silent(e1, 0.5).unwrap();
        let r = dpc_rate(&sc, &p);
        assert!(r.feasible);
    }
}
