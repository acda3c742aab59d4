//! Multi-start maximization of the secondary rate under the secrecy constraints.
//!
//! The search runs over a 5-dimensional unit box: the phase-2 share of the free
//! time, both jamming shares and two log-scaled energy coordinates. The relay
//! split `gamma` is never searched; it is resolved from the secrecy constraint
//! at every evaluated point.

mod four_phase;
mod gamma;

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::awgn::{eta1_min, rate, Coding, RateReport, SchemeParams, Scenario};
use crate::bounds::{dof_slope, DofEstimate};
use crate::error::{Error, Result};

pub use four_phase::{solve_four_phase_comparison, FourPhaseComparison, FourPhaseStage};
pub use gamma::{resolve_gamma, GAMMA_RESIDUAL_TOL, SCAN_POINTS};

use gamma::GammaOutcome;

/// Minimum decades covered by the log-energy coordinates; coordinate 0 maps to zero energy.
pub const ENERGY_DECADES: f64 = 6.0;
/// Smallest nonzero absolute phase energy the energy coordinates reach.
pub const ENERGY_FLOOR: f64 = 1e-4;
/// Random points screened before the local search of each start.
pub const PRESCREEN: usize = 8;
/// Initial compass step in unit-box coordinates.
pub const INITIAL_STEP: f64 = 0.25;
/// Scores closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Dpc3Phase,
    NoDpc3Phase,
    DpcSingle,
    NoDpcSingle,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [Self::Dpc3Phase, Self::NoDpc3Phase, Self::DpcSingle, Self::NoDpcSingle];

    pub fn coding(self) -> Coding {
        match self {
            Self::Dpc3Phase | Self::DpcSingle => Coding::Dpc,
            Self::NoDpc3Phase | Self::NoDpcSingle => Coding::NoDpc,
        }
    }

    pub fn is_single(self) -> bool {
        matches!(self, Self::DpcSingle | Self::NoDpcSingle)
    }

    /// Single-phase restriction of the same coding.
    pub fn single(self) -> Self {
        match self.coding() {
            Coding::Dpc => Self::DpcSingle,
            Coding::NoDpc => Self::NoDpcSingle,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Dpc3Phase => "dpc_3phase",
            Self::NoDpc3Phase => "nodpc_3phase",
            Self::DpcSingle => "dpc_single",
            Self::NoDpcSingle => "nodpc_single",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Usage(format!("unknown scheme '{s}' (expected dpc_3phase, nodpc_3phase, dpc_single or nodpc_single)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub starts: usize,
    pub evals_per_start: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { starts: 64, evals_per_start: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Slack allowed on the reliability constraint when accepting a root.
    pub feasibility: f64,
    /// The local search stops once its step falls below this.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { feasibility: 1e-6, convergence: 1e-7 }
    }
}

/// Variables held fixed during the search.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pins {
    pub eta2: Option<f64>,
    pub rho2: Option<f64>,
    pub rho3: Option<f64>,
    pub p2_2: Option<f64>,
    pub p2_3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptProblem {
    pub scenario: Scenario<f64>,
    pub scheme: SchemeKind,
    pub budgets: Budgets,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub pins: Pins,
    /// Points evaluated verbatim and then used as extra starts.
    pub warm_starts: Vec<SchemeParams<f64>>,
    /// For three-phase schemes, solve the single-phase restriction first and
    /// warm-start from it so the nesting of the feasible sets carries over.
    pub nest_single: bool,
}

impl OptProblem {
    pub fn new(scenario: Scenario<f64>, scheme: SchemeKind) -> Self {
        Self {
            scenario,
            scheme,
            budgets: Budgets::default(),
            seed: 0,
            tolerances: Tolerances::default(),
            pins: Pins::default(),
            warm_starts: Vec::new(),
            nest_single: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budgets(mut self, budgets: Budgets) -> Self {
        self.budgets = budgets;
        self
    }

    pub fn with_pins(mut self, pins: Pins) -> Self {
        self.pins = pins;
        self
    }

    pub fn with_warm_start(mut self, p: SchemeParams<f64>) -> Self {
        self.warm_starts.push(p);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.starts == 0 || self.budgets.evals_per_start == 0 {
            return Err(Error::Usage("optimizer budgets must be positive".into()));
        }
        if !(self.tolerances.feasibility > 0.0) || !(self.tolerances.convergence > 0.0) {
            return Err(Error::Usage("optimizer tolerances must be positive".into()));
        }
        let unit = |name: &str, v: Option<f64>| match v {
            Some(x) if !(0.0..=1.0).contains(&x) => Err(Error::Usage(format!("pinned {name} = {x} outside [0, 1]"))),
            _ => Ok(()),
        };
        unit("rho2", self.pins.rho2)?;
        unit("rho3", self.pins.rho3)?;
        for (name, v) in [("p2_2", self.pins.p2_2), ("p2_3", self.pins.p2_3)] {
            if let Some(x) = v {
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::Usage(format!("pinned {name} = {x} must be finite and nonnegative")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptStatus {
    FeasibleOpt,
    NoFeasiblePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartOrigin {
    /// T2 transmits nothing; always feasible when T2 can decode.
    Silent,
    Random,
    Warm,
    Nested,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub index: usize,
    pub origin: StartOrigin,
    /// Best feasible rate reached by this start.
    pub r2: Option<f64>,
    pub evals: usize,
    pub final_step: f64,
    /// Whether the start's best point spends the whole power budget.
    pub power_binding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub scheme: SchemeKind,
    pub best: Option<SchemeParams<f64>>,
    pub report: Option<RateReport<f64>>,
    pub trace: Vec<StartSummary>,
    pub status: OptStatus,
    /// `eta2 P2(2) + eta3 P2(3) >= P2 - 1e-6` at the optimum.
    pub power_binding: bool,
    /// Set when the optimum leaves part of the power budget unused.
    pub interior_optimum: bool,
    pub diagnostic: Option<String>,
}

impl OptResult {
    pub fn r2(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.r2)
    }

    fn infeasible(scheme: SchemeKind, trace: Vec<StartSummary>, diagnostic: String) -> Self {
        Self {
            scheme,
            best: None,
            report: None,
            trace,
            status: OptStatus::NoFeasiblePoint,
            power_binding: false,
            interior_optimum: false,
            diagnostic: Some(diagnostic),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    params: SchemeParams<f64>,
    score: f64,
    feasible: bool,
}

impl Candidate {
    fn key(&self) -> [f64; 4] {
        let p = &self.params;
        [p.eta2, p.rho2, p.rho3, p.gamma]
    }

    /// Higher score wins; ties go to the lexicographically smallest `(eta2, rho2, rho3, gamma)`.
    fn beats(&self, other: &Candidate) -> bool {
        if (self.score - other.score).abs() > TIE_TOL {
            return self.score > other.score;
        }
        self.key().iter().zip(other.key()).find(|(a, b)| **a != *b).is_some_and(|(a, b)| *a < b)
    }
}

/// Decades spanned by the energy-share coordinate for budget `p2`.
fn decades(p2: f64) -> f64 {
    if p2 > 0.0 {
        ENERGY_DECADES.max((p2 / ENERGY_FLOOR).log10())
    } else {
        ENERGY_DECADES
    }
}

/// Share of the energy budget at coordinate `w`.
fn energy(w: f64, d: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        10f64.powf(-d * (1.0 - w.min(1.0)))
    }
}

fn energy_coord(e: f64, d: f64) -> f64 {
    if e <= 0.0 {
        0.0
    } else {
        (1.0 + e.log10() / d).clamp(0.0, 1.0)
    }
}

/// Maps unit-box coordinates to scheme parameters (gamma left at zero).
struct Space<'a> {
    prob: &'a OptProblem,
    eta1: f64,
    free: Vec<usize>,
}

impl<'a> Space<'a> {
    fn new(prob: &'a OptProblem, eta1: f64) -> Self {
        let single = prob.scheme.is_single();
        let pins = &prob.pins;
        let fixed = [
            single || pins.eta2.is_some(),
            pins.rho2.is_some(),
            single || pins.rho3.is_some(),
            pins.p2_2.is_some(),
            single || pins.p2_3.is_some(),
        ];
        Self { prob, eta1, free: (0..5).filter(|&i| !fixed[i]).collect() }
    }

    fn decode(&self, x: &[f64; 5]) -> Option<SchemeParams<f64>> {
        let pins = &self.prob.pins;
        let single = self.prob.scheme.is_single();
        let p2 = self.prob.scenario.p2;
        let d = decades(p2);
        let energy = |w: f64| energy(w, d);
        let rest = 1.0 - self.eta1;
        let eta2 = if single { rest } else { pins.eta2.unwrap_or(x[0] * rest).clamp(0.0, rest) };
        let eta3 = (rest - eta2).max(0.0);
        let rho2 = pins.rho2.unwrap_or(x[1]);
        let rho3 = if single { 0.0 } else { pins.rho3.unwrap_or(x[2]) };

        let share = |eta: f64, pin: Option<f64>| pin.map(|p| if p2 > 0.0 { eta * p / p2 } else { 0.0 });
        let pin2 = share(eta2, pins.p2_2);
        let pin3 = if single { Some(0.0) } else { share(eta3, pins.p2_3) };
        let (e2, e3) = match (pin2, pin3) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, energy(x[4]) * (1.0 - a).max(0.0)),
            (None, Some(b)) => (energy(x[3]) * (1.0 - b).max(0.0), b),
            (None, None) => {
                let (a, b) = (energy(x[3]), energy(x[4]));
                let s = a + b;
                if s > 1.0 {
                    (a / s, b / s)
                } else {
                    (a, b)
                }
            }
        };
        let power = |eta: f64, e: f64, pin: Option<f64>| match pin {
            Some(p) => p,
            None if eta > 0.0 => e * p2 / eta,
            None => 0.0,
        };
        let p2_2 = if eta2 > 0.0 { power(eta2, e2, pins.p2_2) } else { 0.0 };
        let p2_3 = if eta3 > 0.0 && !single { power(eta3, e3, pins.p2_3) } else { 0.0 };
        // jamming shares of an unpowered phase are immaterial; report them as zero
        let rho2 = if p2_2 == 0.0 && pins.rho2.is_none() { 0.0 } else { rho2 };
        let rho3 = if p2_3 == 0.0 && pins.rho3.is_none() { 0.0 } else { rho3 };
        SchemeParams::new(self.eta1, eta2, rho2, rho3, 0.0, p2_2, p2_3).ok()
    }

    /// Approximate inverse of `decode`, used to seed local search from warm starts.
    fn encode(&self, p: &SchemeParams<f64>) -> [f64; 5] {
        let rest = 1.0 - self.eta1;
        let p2 = self.prob.scenario.p2;
        let e = |eta: f64, pw: f64| if p2 > 0.0 { energy_coord(eta * pw / p2, decades(p2)) } else { 0.0 };
        [
            if rest > 0.0 { (p.eta2 / rest).clamp(0.0, 1.0) } else { 0.0 },
            p.rho2,
            p.rho3,
            e(p.eta2, p.p2_2),
            e(p.eta3, p.p2_3),
        ]
    }
}

struct Ctx<'a> {
    space: Space<'a>,
}

impl Ctx<'_> {
    fn sc(&self) -> &Scenario<f64> {
        &self.space.prob.scenario
    }

    fn coding(&self) -> Coding {
        self.space.prob.scheme.coding()
    }

    /// Scores a parameter point whose gamma is taken as given.
    fn score_fixed(&self, p: &SchemeParams<f64>) -> Candidate {
        let rep = rate(self.sc(), p, self.coding());
        let budget = p.within_budget(self.sc().p2);
        if rep.feasible && budget {
            return Candidate { params: *p, score: rep.r2, feasible: true };
        }
        let sec = match self.coding() {
            Coding::Dpc => rep.residual_secrecy.abs(),
            Coding::NoDpc => (-rep.residual_secrecy).max(0.0),
        };
        let over = (p.average_power() - self.sc().p2).max(0.0);
        let v = (-rep.residual_reliability).max(0.0) + sec + over;
        Candidate { params: *p, score: -1.0 - v - 1e-12, feasible: false }
    }

    fn score_params(&self, p: &SchemeParams<f64>) -> Candidate {
        let tol = self.space.prob.tolerances.feasibility;
        match gamma::resolve(self.sc(), p, self.coding(), tol) {
            GammaOutcome::Found(g) => self.score_fixed(&p.with_gamma(g)),
            GammaOutcome::Violation(v) => Candidate { params: *p, score: -1.0 - v.abs() - 1e-12, feasible: false },
        }
    }

    fn score(&self, x: &[f64; 5]) -> Option<Candidate> {
        self.space.decode(x).map(|p| self.score_params(&p))
    }

    /// Compass search with step halving over the free coordinates.
    fn local(&self, mut x: [f64; 5], mut best: Candidate, mut evals: usize) -> (Candidate, usize, f64) {
        let budget = self.space.prob.budgets.evals_per_start;
        let conv = self.space.prob.tolerances.convergence;
        let mut step = INITIAL_STEP;
        while step >= conv && evals < budget {
            let mut moved = false;
            'coords: for &i in &self.space.free {
                for dir in [1.0, -1.0] {
                    if evals >= budget {
                        break 'coords;
                    }
                    let mut y = x;
                    y[i] = (x[i] + dir * step).clamp(0.0, 1.0);
                    if y[i] == x[i] {
                        continue;
                    }
                    evals += 1;
                    if let Some(c) = self.score(&y) {
                        if c.score > best.score + TIE_TOL {
                            x = y;
                            best = c;
                            moved = true;
                            continue 'coords;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (best, evals, step)
    }

    fn run_start(&self, index: usize, seed: u64) -> (Option<Candidate>, StartSummary) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let mut best: Option<([f64; 5], Candidate)> = None;
        let mut evals = 0;
        for _ in 0..PRESCREEN.min(self.space.prob.budgets.evals_per_start) {
            let mut x = [0.0; 5];
            for v in x.iter_mut() {
                *v = rng.random::<f64>();
            }
            evals += 1;
            if let Some(c) = self.score(&x) {
                if best.as_ref().is_none_or(|(_, b)| c.beats(b)) {
                    best = Some((x, c));
                }
            }
        }
        let Some((x, c)) = best else {
            return (None, self.summary(index, StartOrigin::Random, None, evals, INITIAL_STEP));
        };
        let (c, evals, step) = self.local(x, c, evals);
        (Some(c), self.summary(index, StartOrigin::Random, Some(&c), evals, step))
    }

    fn run_warm(&self, index: usize, origin: StartOrigin, p: &SchemeParams<f64>) -> (Option<Candidate>, StartSummary) {
        let mut p = *p;
        if self.space.prob.scheme.is_single() {
            p = p.single_phase();
        }
        let direct = (p.validate().is_ok() && (p.eta1 - self.space.eta1).abs() <= 1e-12).then(|| self.score_fixed(&p));
        let x = self.space.encode(&p);
        let seeded = self.score(&x);
        let start = match (direct, seeded) {
            (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
            (a, b) => a.or(b),
        };
        let Some(start) = start else {
            return (None, self.summary(index, origin, None, 2, INITIAL_STEP));
        };
        let (c, evals, step) = self.local(x, start, 2);
        // the verbatim point is kept whenever local search cannot beat it
        let c = match direct {
            Some(d) if d.beats(&c) => d,
            _ => c,
        };
        (Some(c), self.summary(index, origin, Some(&c), evals, step))
    }

    fn summary(&self, index: usize, origin: StartOrigin, c: Option<&Candidate>, evals: usize, step: f64) -> StartSummary {
        let feasible = c.filter(|c| c.feasible);
        StartSummary {
            index,
            origin,
            r2: feasible.map(|c| c.score),
            evals,
            final_step: step,
            power_binding: feasible.is_some_and(|c| self.binding(&c.params)),
        }
    }

    fn binding(&self, p: &SchemeParams<f64>) -> bool {
        p.average_power() >= self.sc().p2 - 1e-6
    }
}

/// Maximizes the secondary rate of `prob.scheme`.
///
/// Deterministic for a fixed problem and seed regardless of the thread count:
/// start `k` draws from stream `k` of the seeded generator and the reduction
/// runs in start order.
pub fn solve(prob: &OptProblem) -> Result<OptResult> {
    prob.validate()?;
    let sc = &prob.scenario;
    if let Err(e) = sc.gains.check_decodable() {
        return Ok(OptResult::infeasible(prob.scheme, Vec::new(), e.to_string()));
    }
    let eta1 = eta1_min(sc)?;

    let silent_eta2 = if prob.scheme.is_single() { 1.0 - eta1 } else { 0.0 };
    let mut seeds = vec![(StartOrigin::Silent, SchemeParams::silent(eta1, silent_eta2)?)];
    seeds.extend(prob.warm_starts.iter().map(|p| (StartOrigin::Warm, *p)));
    if prob.nest_single && !prob.scheme.is_single() {
        let sub = OptProblem { scheme: prob.scheme.single(), nest_single: false, ..prob.clone() };
        if let Some(p) = solve(&sub)?.best {
            seeds.push((StartOrigin::Nested, p));
        }
    }

    let ctx = Ctx { space: Space::new(prob, eta1) };
    let n_warm = seeds.len();
    let runs: Vec<(Option<Candidate>, StartSummary)> = (0..n_warm + prob.budgets.starts)
        .into_par_iter()
        .map(|k| {
            if k < n_warm {
                ctx.run_warm(k, seeds[k].0, &seeds[k].1)
            } else {
                ctx.run_start(k - n_warm, prob.seed)
            }
        })
        .collect();

    let mut trace = Vec::with_capacity(runs.len());
    let mut best: Option<Candidate> = None;
    for (c, s) in runs {
        trace.push(s);
        if let Some(c) = c.filter(|c| c.feasible) {
            if best.as_ref().is_none_or(|b| c.beats(b)) {
                best = Some(c);
            }
        }
    }
    let Some(best) = best else {
        return Ok(OptResult::infeasible(prob.scheme, trace, "no start reached a feasible point".into()));
    };

    // independent certificate through the rate evaluator
    let report = rate(sc, &best.params, prob.scheme.coding());
    if !report.feasible || !best.params.within_budget(sc.p2) {
        return Ok(OptResult::infeasible(prob.scheme, trace, "best point failed re-validation".into()));
    }
    let power_binding = ctx.binding(&best.params);
    Ok(OptResult {
        scheme: prob.scheme,
        best: Some(best.params),
        report: Some(report),
        trace,
        status: OptStatus::FeasibleOpt,
        power_binding,
        interior_optimum: !power_binding,
        diagnostic: (!power_binding).then(|| "optimum leaves part of the power budget unused".to_string()),
    })
}

/// Degrees of freedom of the best achievable rate along a family of scenarios
/// indexed by `P2`; every grid point is solved with `template`'s settings.
///
/// Along an increasing grid each solve is warm-started from the previous
/// optimum, which stays within the larger budget.
pub fn dof_lb(family: impl Fn(f64) -> Result<Scenario<f64>>, grid: &[f64], template: &OptProblem) -> Result<DofEstimate<f64>> {
    dof_slope(grid, &vec![0.0; grid.len()])?;
    let mut points = Vec::with_capacity(grid.len());
    let mut prev: Option<(f64, SchemeParams<f64>)> = None;
    for &p2 in grid {
        let mut prob = OptProblem { scenario: family(p2)?, ..template.clone() };
        if let Some((q, p)) = prev.filter(|(q, _)| *q <= p2) {
            debug_assert!(q <= p2);
            prob.warm_starts.push(p);
        }
        let r = solve(&prob)?;
        prev = r.best.map(|p| (p2, p));
        let v = r.r2().ok_or_else(|| Error::Infeasible(format!("no feasible point at P2 = {p2}")))?;
        points.push((p2, v));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    Ok(DofEstimate { slope: dof_slope(&xs, &ys)?, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelGains;

    fn scenario(p2: f64) -> Scenario<f64> {
        Scenario::new(ChannelGains::real(1.0, 0.9, 0.3, 0.8, 10.0).unwrap(), 10.0, p2).unwrap()
    }

    fn small(sc: Scenario<f64>, kind: SchemeKind) -> OptProblem {
        OptProblem::new(sc, kind).with_budgets(Budgets { starts: 6, evals_per_start: 400 }).with_seed(7)
    }

    #[test]
    fn scheme_names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("dpc".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn energy_map_is_monotone_with_zero_floor() {
        let d = decades(1e8);
        assert_eq!(d, 12.0);
        assert_eq!(energy(0.0, d), 0.0);
        assert_eq!(energy(1.0, d), 1.0);
        assert!(energy(0.3, d) < energy(0.31, d));
        assert!((energy_coord(energy(0.42, d), d) - 0.42).abs() < 1e-12);
        assert_eq!(decades(10.0), ENERGY_DECADES);
    }

    #[test]
    fn zero_budget_gives_zero_rate_and_silent_powers() {
        let r = solve(&small(scenario(0.0), SchemeKind::Dpc3Phase)).unwrap();
        assert_eq!(r.status, OptStatus::FeasibleOpt);
        let b = r.best.unwrap();
        assert_eq!(r.r2().unwrap(), 0.0);
        assert_eq!((b.p2_2, b.p2_3), (0.0, 0.0));
    }

    #[test]
    fn undecodable_gains_short_circuit() {
        let sc = Scenario { gains: ChannelGains::real(1.0, 0.5, 0.3, 0.8, 0.5).unwrap(), ..scenario(10.0) };
        let r = solve(&small(sc, SchemeKind::DpcSingle)).unwrap();
        assert_eq!(r.status, OptStatus::NoFeasiblePoint);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn result_is_certified_and_deterministic() {
        let p = small(scenario(20.0), SchemeKind::Dpc3Phase);
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a, b);
        let best = a.best.unwrap();
        assert!(rate(&p.scenario, &best, Coding::Dpc).feasible);
        assert!(best.within_budget(20.0));
        assert!(a.power_binding || a.interior_optimum);
    }

    #[test]
    fn single_phase_never_beats_three_phase() {
        for kind in [SchemeKind::Dpc3Phase, SchemeKind::NoDpc3Phase] {
            let three = solve(&small(scenario(20.0), kind)).unwrap().r2().unwrap();
            let one = solve(&small(scenario(20.0), kind.single())).unwrap().r2().unwrap();
            assert!(one <= three + 1e-6, "{kind}: {one} > {three}");
        }
    }

    #[test]
    fn warm_start_is_never_lost() {
        let sc = scenario(20.0);
        let e1 = eta1_min(&sc).unwrap();
        let warm = SchemeParams::silent(e1, 1.0 - e1).unwrap();
        let p = small(sc, SchemeKind::DpcSingle).with_warm_start(warm);
        let r = solve(&p).unwrap();
        assert!(r.r2().unwrap() >= 0.0);
        assert_eq!(r.trace[0].origin, StartOrigin::Silent);
        assert_eq!(r.trace[1].origin, StartOrigin::Warm);
    }

    #[test]
    fn invalid_budgets_rejected() {
        let p = small(scenario(1.0), SchemeKind::DpcSingle).with_budgets(Budgets { starts: 0, evals_per_start: 1 });
        assert!(matches!(solve(&p), Err(Error::Usage(_))));
    }
}
