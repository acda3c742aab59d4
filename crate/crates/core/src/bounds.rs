//! Gaussian outer bound on the `(R_s1, R_2)` region, the search for the largest
//! secondary rate compatible with a primary target, and degrees-of-freedom fits.

use num_complex::Complex;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::StandardizedChannel;
use crate::error::{Error, Result};
use crate::scalar::{pos, Real};

/// Free parameters of the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterBoundParams<T> {
    pub alpha: T,
    pub beta: T,
    pub delta: T,
    pub eta: T,
    pub gamma: T,
    pub rho: Complex<T>,
}

impl<T: Real> OuterBoundParams<T> {
    pub fn new(alpha: T, beta: T, delta: T, eta: T, gamma: T, rho: Complex<T>) -> Result<Self> {
        let p = Self { alpha, beta, delta, eta, gamma, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("alpha", self.alpha), ("beta", self.beta), ("delta", self.delta), ("eta", self.eta), ("gamma", self.gamma)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::Invalid(format!("{n} = {v} outside [0, 1]")));
            }
        }
        if !(self.rho.norm() <= T::one() + T::epsilon() * T::lit(4.0)) {
            return Err(Error::Invalid(format!("|rho| = {} exceeds 1", self.rho.norm())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPoint<T> {
    pub r_s1_ub: T,
    pub r2_ub: T,
    pub params: OuterBoundParams<T>,
}

struct Powers<T> {
    s1: T,
    s2: T,
}

fn received<T: Real>(std: &StandardizedChannel<T>, rho: Complex<T>) -> Powers<T> {
    let (p1, p2) = (std.p1_tilde, std.p2_tilde);
    let root = (p1 * p2).sqrt();
    let two = T::lit(2.0);
    Powers {
        s1: p1 + std.a.norm_sqr() * p2 + two * (std.a * rho).re * root,
        s2: std.b.norm_sqr() * p1 + p2 + two * (std.b * rho).re * root,
    }
}

fn lg<T: Real>(num: T, den: T) -> T {
    (num / den).log2()
}

/// The two candidate terms of the secrecy bound, `(t1, t2)`.
fn secrecy_terms<T: Real>(std: &StandardizedChannel<T>, bp: &OuterBoundParams<T>, pw: &Powers<T>) -> (T, T) {
    let one = T::one();
    let a2p2 = std.a.norm_sqr() * std.p2_tilde;
    let t1 = lg(one + pw.s1, one + bp.alpha * pw.s1);
    let t2 = pos(lg(one + bp.gamma * pw.s1, one + bp.beta * pw.s2) - lg(one + bp.eta * a2p2, one + bp.delta * std.p1_tilde));
    (t1, t2)
}

fn secondary_term<T: Real>(std: &StandardizedChannel<T>, bp: &OuterBoundParams<T>, pw: &Powers<T>) -> T {
    let one = T::one();
    let a2p2 = std.a.norm_sqr() * std.p2_tilde;
    let b2 = std.b.norm_sqr();
    let head = lg(one + pw.s2, one + bp.beta * pw.s2);
    let penalty = pos(lg(one + std.p1_tilde, one + b2 * std.p2_tilde) - lg(one + bp.gamma * pw.s1, one + bp.eta * a2p2));
    pos(head - penalty)
}

/// Evaluates both bound expressions at one parameter point.
pub fn awgn_outer_point<T: Real>(std: &StandardizedChannel<T>, bp: &OuterBoundParams<T>) -> BoundPoint<T> {
    let pw = received(std, bp.rho);
    let (t1, t2) = secrecy_terms(std, bp, &pw);
    BoundPoint { r_s1_ub: pos(t1.min(t2)), r2_ub: secondary_term(std, bp, &pw), params: *bp }
}

/// How a sampled point is admitted to the target set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Membership {
    /// `|r_s1_ub - target| <= eps`.
    #[default]
    Equality,
    /// `r_s1_ub >= target - eps`.
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterSearchConfig {
    pub samples: usize,
    pub eps: f64,
    pub refine_top: usize,
    pub refine_sweeps: usize,
    pub complex_rho: bool,
    pub membership: Membership,
    pub seed: u64,
}

impl Default for OuterSearchConfig {
    fn default() -> Self {
        Self {
            samples: 20_000,
            eps: 1e-3,
            refine_top: 10,
            refine_sweeps: 12,
            complex_rho: false,
            membership: Membership::Equality,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterSearchResult<T> {
    /// Largest admitted `r2_ub` after refinement; `None` when no sample was admitted.
    pub r2_outer: Option<T>,
    /// Largest admitted `r2_ub` among the raw samples.
    pub sampled_best: Option<T>,
    pub best: Option<BoundPoint<T>>,
    pub members: usize,
    /// Whether the channel satisfies the degradedness hypothesis of the bound.
    pub degraded: bool,
    pub diagnostic: String,
}

const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// Randomly shifted Halton point `i` in `[0,1)^dim`.
fn halton(i: u64, shift: &[f64]) -> Vec<f64> {
    shift.iter().enumerate().map(|(d, s)| (radical_inverse(i, PRIMES[d]) + s).fract()).collect()
}

/// Probability mass placed on each face of every sampling coordinate.
const EDGE_MASS: f64 = 0.05;

struct Searcher<'a, T> {
    std: &'a StandardizedChannel<T>,
    target: T,
    cfg: &'a OuterSearchConfig,
}

impl<T: Real> Searcher<'_, T> {
    fn dims(&self) -> usize {
        if self.cfg.complex_rho {
            6
        } else {
            5
        }
    }

    /// Maps unit coordinates `(beta, delta, eta, gamma, rho...)` to a bound point,
    /// choosing `alpha` so the first secrecy term hits the target whenever possible.
    fn decode(&self, u: &[f64]) -> OuterBoundParams<T> {
        // the faces of the box carry positive mass so that optima on the
        // boundary (typically eta = 0, delta = 1 at large P2) are sampled
        let c = |v: f64| ((v - EDGE_MASS) / (1.0 - 2.0 * EDGE_MASS)).clamp(0.0, 1.0);
        let rho = if self.cfg.complex_rho {
            Complex::from_polar(T::lit(c(u[4]).sqrt()), T::lit(std::f64::consts::TAU * u[5]))
        } else {
            Complex::new(T::lit(2.0 * c(u[4]) - 1.0), T::zero())
        };
        let mut bp = OuterBoundParams {
            alpha: T::zero(),
            beta: T::lit(c(u[0])),
            delta: T::lit(c(u[1])),
            eta: T::lit(c(u[2])),
            gamma: T::lit(c(u[3])),
            rho,
        };
        if self.cfg.membership == Membership::Equality {
            let s1 = received(self.std, rho).s1;
            if s1 > T::zero() {
                let a = ((T::one() + s1) * T::lit(2.0).powf(-self.target) - T::one()) / s1;
                bp.alpha = a.max(T::zero()).min(T::one());
            }
        }
        bp
    }

    fn admit(&self, p: &BoundPoint<T>) -> bool {
        let eps = T::lit(self.cfg.eps);
        match self.cfg.membership {
            Membership::Equality => (p.r_s1_ub - self.target).abs() <= eps,
            Membership::AtLeast => p.r_s1_ub >= self.target - eps,
        }
    }

    fn score(&self, u: &[f64]) -> Option<BoundPoint<T>> {
        let p = awgn_outer_point(self.std, &self.decode(u));
        self.admit(&p).then_some(p)
    }

    fn refine(&self, start: &[f64]) -> (Vec<f64>, BoundPoint<T>) {
        let mut x = start.to_vec();
        let mut best = self.score(&x).expect("refinement starts from an admitted point");
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        let mut width = 0.25;
        for _ in 0..self.cfg.refine_sweeps {
            for d in 0..x.len() {
                let lo0 = (x[d] - width).max(0.0);
                let hi0 = (x[d] + width).min(1.0);
                let eval = |t: f64, x: &[f64]| -> (f64, Option<BoundPoint<T>>) {
                    let mut y = x.to_vec();
                    y[d] = t;
                    match self.score(&y) {
                        Some(p) => (p.r2_ub.as_f64(), Some(p)),
                        None => (f64::NEG_INFINITY, None),
                    }
                };
                let (mut lo, mut hi) = (lo0, hi0);
                let mut c = hi - gr * (hi - lo);
                let mut e = lo + gr * (hi - lo);
                let (mut fc, mut pc) = eval(c, &x);
                let (mut fe, mut pe) = eval(e, &x);
                let mut cand: Option<(f64, BoundPoint<T>)> = None;
                let keep = |t: f64, p: &Option<BoundPoint<T>>, cand: &mut Option<(f64, BoundPoint<T>)>| {
                    if let Some(p) = p {
                        if cand.as_ref().is_none_or(|(_, q)| p.r2_ub > q.r2_ub) {
                            *cand = Some((t, *p));
                        }
                    }
                };
                keep(c, &pc, &mut cand);
                keep(e, &pe, &mut cand);
                for _ in 0..40 {
                    if fc >= fe {
                        hi = e;
                        e = c;
                        fe = fc;
                        pe = pc;
                        c = hi - gr * (hi - lo);
                        (fc, pc) = eval(c, &x);
                        keep(c, &pc, &mut cand);
                    } else {
                        lo = c;
                        c = e;
                        fc = fe;
                        pc = pe;
                        e = lo + gr * (hi - lo);
                        (fe, pe) = eval(e, &x);
                        keep(e, &pe, &mut cand);
                    }
                }
                for t in [lo0, hi0] {
                    let (_, p) = eval(t, &x);
                    keep(t, &p, &mut cand);
                }
                if let Some((t, p)) = cand {
                    if p.r2_ub > best.r2_ub {
                        best = p;
                        x[d] = t;
                    }
                }
            }
            width *= 0.5;
        }
        (x, best)
    }
}

/// Largest outer-bound secondary rate over parameters whose secrecy bound
/// matches `r_s1_target`.
///
/// Quasi-random sampling (shifted Halton) followed by coordinate-wise
/// golden-section refinement of the best admitted samples.
pub fn r2_outer<T: Real>(std: &StandardizedChannel<T>, r_s1_target: T, cfg: &OuterSearchConfig) -> OuterSearchResult<T> {
    let s = Searcher { std, target: r_s1_target, cfg };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shift: Vec<f64> = (0..s.dims()).map(|_| rng.random::<f64>()).collect();

    let scored: Vec<(usize, Vec<f64>, BoundPoint<T>)> = (0..cfg.samples)
        .into_par_iter()
        .filter_map(|i| {
            let u = halton(i as u64 + 1, &shift);
            s.score(&u).map(|p| (i, u, p))
        })
        .collect();
    let members = scored.len();
    let degraded = std.is_degraded();
    if members == 0 {
        return OuterSearchResult {
            r2_outer: None,
            sampled_best: None,
            best: None,
            members,
            degraded,
            diagnostic: format!(
                "no sample matched r_s1 target {} within {} over {} samples",
                r_s1_target, cfg.eps, cfg.samples
            ),
        };
    }
    let mut order: Vec<usize> = (0..members).collect();
    order.sort_by(|&i, &j| scored[j].2.r2_ub.partial_cmp(&scored[i].2.r2_ub).unwrap().then(scored[i].0.cmp(&scored[j].0)));
    let sampled = scored[order[0]].2;

    let refined: Vec<BoundPoint<T>> = order
        .iter()
        .take(cfg.refine_top.max(1))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&k| if cfg.refine_sweeps > 0 { s.refine(&scored[k].1).1 } else { scored[k].2 })
        .collect();
    let best = refined.into_iter().fold(sampled, |b, p| if p.r2_ub > b.r2_ub { p } else { b });
    OuterSearchResult {
        r2_outer: Some(best.r2_ub),
        sampled_best: Some(sampled.r2_ub),
        best: Some(best),
        members,
        degraded,
        diagnostic: if degraded { String::new() } else { "channel is not degraded (|b| > 1); bound reported regardless".into() },
    }
}

/// Bound on the secondary rate scaled by the time left after listening.
pub fn scale_ub<T: Real>(r2_ub: T, eta1_star: T) -> Result<T> {
    if !(eta1_star >= T::zero() && eta1_star <= T::one()) {
        return Err(Error::Invalid(format!("eta1* = {eta1_star} outside [0, 1]")));
    }
    Ok((T::one() - eta1_star) * r2_ub)
}

/// Least-squares slope of `rates` against `log2(p2)`; the grid must span at
/// least four decades.
pub fn dof_slope<T: Real>(p2: &[T], rates: &[T]) -> Result<T> {
    if p2.len() != rates.len() || p2.len() < 2 {
        return Err(Error::Usage("slope fit needs at least two (p2, rate) pairs".into()));
    }
    if p2.iter().any(|p| !(*p > T::zero())) {
        return Err(Error::Usage("slope fit needs positive powers".into()));
    }
    let lo = p2.iter().cloned().fold(T::infinity(), T::min);
    let hi = p2.iter().cloned().fold(T::zero(), T::max);
    if hi / lo < T::lit(1e4) * (T::one() - T::lit(1e-9)) {
        return Err(Error::Usage(format!("power grid spans {lo}..{hi}, fewer than four decades")));
    }
    let n = T::from_usize(p2.len()).unwrap();
    let xs: Vec<T> = p2.iter().map(|p| p.log2()).collect();
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = rates.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, y) in xs.iter().zip(rates) {
        sxy = sxy + (*x - mx) * (*y - my);
        sxx = sxx + (*x - mx) * (*x - mx);
    }
    Ok(sxy / sxx)
}

/// Slope estimate with the points it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofEstimate<T> {
    pub slope: T,
    /// `(p2, rate)` pairs.
    pub points: Vec<(T, T)>,
}

/// Degrees of freedom of the outer bound along a family of channels indexed by `P2`.
pub fn dof_ub<T: Real>(
    family: impl Fn(T) -> Result<StandardizedChannel<T>>,
    r_s1_target: T,
    grid: &[T],
    cfg: &OuterSearchConfig,
) -> Result<DofEstimate<T>> {
    dof_slope(grid, &vec![T::zero(); grid.len()])?;
    let mut points = Vec::with_capacity(grid.len());
    for &p2 in grid {
        let r = r2_outer(&family(p2)?, r_s1_target, cfg);
        let v = r.r2_outer.ok_or_else(|| Error::Infeasible(format!("outer bound at P2 = {p2}: {}", r.diagnostic)))?;
        points.push((p2, v));
    }
    let (xs, ys): (Vec<T>, Vec<T>) = points.iter().cloned().unzip();
    Ok(DofEstimate { slope: dof_slope(&xs, &ys)?, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gap(p2: f64) -> StandardizedChannel<f64> {
        StandardizedChannel::new(Complex::new(0.1, 0.0), Complex::new(0.9, 0.0), 10.0, p2).unwrap()
    }

    fn half() -> OuterBoundParams<f64> {
        OuterBoundParams::new(0.5, 0.5, 0.5, 0.5, 0.5, Complex::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn beta_one_leaves_only_the_penalty() {
        let bp = OuterBoundParams { beta: 1.0, ..half() };
        assert_eq!(awgn_outer_point(&gap(10.0), &bp).r2_ub, 0.0);
    }

    #[test]
    fn alpha_one_kills_secrecy_bound() {
        let bp = OuterBoundParams { alpha: 1.0, ..half() };
        assert_eq!(awgn_outer_point(&gap(10.0), &bp).r_s1_ub, 0.0);
    }

    #[test]
    fn half_point_matches_hand_evaluation() {
        let p = awgn_outer_point(&gap(10.0), &half());
        // S1 = 10 + 0.01*10 = 10.1, S2 = 0.81*10 + 10 = 18.1
        let t1 = (11.1f64 / 6.05).log2();
        let t2 = ((6.05f64 / 10.05).log2() - (1.05f64 / 6.0).log2()).max(0.0);
        assert_relative_eq!(p.r_s1_ub, t1.min(t2), epsilon = 1e-14);
        let r2 = (19.1f64 / 10.05).log2() - ((11.0f64 / 9.1).log2() - (6.05f64 / 1.05).log2()).max(0.0);
        assert_relative_eq!(p.r2_ub, r2.max(0.0), epsilon = 1e-14);
    }

    #[test]
    fn conjugation_symmetry() {
        let std = StandardizedChannel::new(Complex::from_polar(0.3, 0.7), Complex::from_polar(0.6, -0.4), 5.0, 7.0).unwrap();
        let conj = StandardizedChannel { a: std.a.conj(), b: std.b.conj(), ..std };
        let bp = OuterBoundParams { rho: Complex::from_polar(0.8, 1.3), ..half() };
        let bq = OuterBoundParams { rho: bp.rho.conj(), ..bp };
        let (x, y) = (awgn_outer_point(&std, &bp), awgn_outer_point(&conj, &bq));
        assert_relative_eq!(x.r2_ub, y.r2_ub, epsilon = 1e-14);
        assert_relative_eq!(x.r_s1_ub, y.r_s1_ub, epsilon = 1e-14);
    }

    #[test]
    fn params_are_validated() {
        assert!(OuterBoundParams::new(1.1, 0.0, 0.0, 0.0, 0.0, Complex::new(0.0, 0.0)).is_err());
        assert!(OuterBoundParams::new(0.1, 0.0, 0.0, 0.0, 0.0, Complex::new(0.9, 0.9)).is_err());
    }

    #[test]
    fn halton_is_low_discrepancy_in_each_axis() {
        let pts: Vec<Vec<f64>> = (1..=1000).map(|i| halton(i, &[0.0; 6])).collect();
        for d in 0..6 {
            let mean: f64 = pts.iter().map(|p| p[d]).sum::<f64>() / 1000.0;
            assert!((mean - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn zero_target_relaxed_is_unconstrained_max() {
        let cfg = OuterSearchConfig { membership: Membership::AtLeast, samples: 4000, ..Default::default() };
        let r = r2_outer(&gap(10.0), 0.0, &cfg);
        assert_eq!(r.members, 4000);
        // beta = 0, gamma = 1, rho = 1 maximizes r2_ub when the penalty vanishes
        let best = awgn_outer_point(&gap(10.0), &OuterBoundParams::new(0.0, 0.0, 0.0, 0.0, 1.0, Complex::new(1.0, 0.0)).unwrap());
        assert!(r.r2_outer.unwrap() >= best.r2_ub - 1e-6);
    }

    #[test]
    fn larger_budget_never_lowers_the_sampled_max() {
        let t = 0.4;
        let small = OuterSearchConfig { samples: 1000, refine_sweeps: 0, ..Default::default() };
        let large = OuterSearchConfig { samples: 2000, ..small };
        let a = r2_outer(&gap(20.0), t, &small).sampled_best.unwrap();
        let b = r2_outer(&gap(20.0), t, &large).sampled_best.unwrap();
        assert!(b >= a);
    }

    #[test]
    fn unreachable_target_is_reported() {
        let r = r2_outer(&gap(10.0), 50.0, &OuterSearchConfig { samples: 500, ..Default::default() });
        assert!(r.r2_outer.is_none());
        assert!(!r.diagnostic.is_empty());
    }

    #[test]
    fn scaling() {
        assert_relative_eq!(scale_ub(1.0, 0.3471).unwrap(), 0.6529, epsilon = 1e-12);
        assert_eq!(scale_ub(2.0, 0.0).unwrap(), 2.0);
        assert_eq!(scale_ub(2.0, 1.0).unwrap(), 0.0);
        assert!(scale_ub(2.0, 1.5).is_err());
    }

    #[test]
    fn slope_fits() {
        let grid: Vec<f64> = (2..=8).map(|k| 10f64.powi(k)).collect();
        let lin: Vec<f64> = grid.iter().map(|p| 0.37 * p.log2() + 1.5).collect();
        assert_relative_eq!(dof_slope(&grid, &lin).unwrap(), 0.37, epsilon = 1e-9);
        assert!(dof_slope(&grid, &vec![2.0; grid.len()]).unwrap().abs() < 1e-12);
        assert!(matches!(dof_slope(&[10.0, 100.0], &[1.0, 2.0]), Err(Error::Usage(_))));
        assert!(matches!(dof_slope(&[10.0, 10.0], &[1.0, 1.0]), Err(Error::Usage(_))));
    }
}
