//! Batch studies over node positions and power levels, written as CSV.
//!
//! Every study is a pure function of its spec: grid points are solved in
//! parallel but collected in grid order, so reruns give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::awgn::{eta1_min, SchemeParams, Scenario};
use crate::bounds::{dof_ub, r2_outer, scale_ub, DofEstimate, OuterSearchConfig};
use crate::channel::{gains_from_geometry, standardize, ChannelGains, Geometry, Normalization, Point};
use crate::error::{Error, Result};
use crate::optimize::{dof_lb, solve, Budgets, OptProblem, SchemeKind};

/// Linear power from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Closed interval sampled at `start + k step`, endpoint included up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
}

fn axis_points(a: &Axis, step: f64) -> Vec<f64> {
    let n = ((a.max - a.min) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| a.min + k as f64 * step).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub x: Axis,
    pub y: Axis,
    pub step: f64,
    pub t1: Point<f64>,
    pub u1: Point<f64>,
    pub u2: Point<f64>,
    pub pathloss_exponent: f64,
    pub normalization: Normalization,
    pub schemes: Vec<SchemeKind>,
    pub p1: f64,
    pub p2: Vec<f64>,
    /// Overrides the baseline primary secrecy rate when set.
    pub r_s1_target: Option<f64>,
    pub budgets: Budgets,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            x: Axis { min: -0.5, max: 1.5 },
            y: Axis { min: -0.5, max: 1.5 },
            step: 0.05,
            t1: Point::new(0.0, 0.0),
            u1: Point::new(1.0, 0.0),
            u2: Point::new(1.0, -1.0),
            pathloss_exponent: 3.0,
            normalization: Normalization::Normalized,
            schemes: SchemeKind::ALL.to_vec(),
            p1: db_to_linear(10.0),
            p2: vec![db_to_linear(20.0)],
            r_s1_target: None,
            budgets: Budgets::default(),
            seed: 0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Usage(format!("grid step must be positive, got {}", self.step)));
        }
        if !(self.x.max >= self.x.min) || !(self.y.max >= self.y.min) {
            return Err(Error::Usage("grid ranges must satisfy min <= max".into()));
        }
        if self.schemes.is_empty() || self.p2.is_empty() {
            return Err(Error::Usage("a sweep needs at least one scheme and one P2 value".into()));
        }
        if self.p2.iter().any(|p| !(*p >= 0.0)) || !(self.p1 > 0.0) {
            return Err(Error::Usage("powers must be nonnegative (P1 positive)".into()));
        }
        Ok(())
    }

    /// T2 positions in row-major order (y outer, x inner).
    pub fn grid(&self) -> Vec<Point<f64>> {
        let xs = axis_points(&self.x, self.step);
        axis_points(&self.y, self.step).into_iter().flat_map(|y| xs.iter().map(move |&x| Point::new(x, y))).collect()
    }

    fn scenario(&self, t2: Point<f64>, p2: f64) -> Result<Scenario<f64>> {
        let geo = Geometry::new(self.t1, self.u1, t2, self.u2, self.pathloss_exponent)?;
        let sc = Scenario::new(gains_from_geometry(&geo, self.normalization)?, self.p1, p2)?;
        match self.r_s1_target {
            Some(t) => sc.with_target(t),
            None => Ok(sc),
        }
    }

    fn problem(&self, sc: Scenario<f64>, kind: SchemeKind) -> OptProblem {
        OptProblem::new(sc, kind).with_budgets(self.budgets).with_seed(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeOutcome {
    pub scheme: SchemeKind,
    /// `None` when the optimizer found no feasible point.
    pub r2: Option<f64>,
    pub params: Option<SchemeParams<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub t2: Point<f64>,
    pub p2: f64,
    /// Whether T2 can decode the primary message; points failing it are kept and flagged.
    pub decodable: bool,
    /// Set when the point could not be evaluated at all (T2 on top of another node).
    pub invalid: bool,
    pub outcomes: Vec<SchemeOutcome>,
    pub diff_dpc_nodpc: Option<f64>,
    pub diff_3ph_single: Option<f64>,
}

impl SweepRecord {
    pub fn r2(&self, kind: SchemeKind) -> Option<f64> {
        self.outcomes.iter().find(|o| o.scheme == kind).and_then(|o| o.r2)
    }
}

fn sweep_point(spec: &SweepSpec, t2: Point<f64>, p2: f64) -> Result<SweepRecord> {
    let empty = |decodable: bool, invalid: bool| SweepRecord {
        t2,
        p2,
        decodable,
        invalid,
        outcomes: spec.schemes.iter().map(|&scheme| SchemeOutcome { scheme, r2: None, params: None }).collect(),
        diff_dpc_nodpc: None,
        diff_3ph_single: None,
    };
    let sc = match spec.scenario(t2, p2) {
        Ok(sc) => sc,
        Err(Error::Domain(_)) => return Ok(empty(false, true)),
        Err(e) => return Err(e),
    };
    if !sc.gains.is_decodable() {
        return Ok(empty(false, false));
    }
    let mut outcomes = Vec::with_capacity(spec.schemes.len());
    for &scheme in &spec.schemes {
        let r = solve(&spec.problem(sc, scheme))?;
        outcomes.push(SchemeOutcome { scheme, r2: r.r2(), params: r.best });
    }
    let mut rec = SweepRecord { outcomes, ..empty(true, false) };
    let diff = |r: &SweepRecord, a, b| Some(r.r2(a)? - r.r2(b)?);
    rec.diff_dpc_nodpc = diff(&rec, SchemeKind::Dpc3Phase, SchemeKind::NoDpc3Phase);
    rec.diff_3ph_single = diff(&rec, SchemeKind::Dpc3Phase, SchemeKind::DpcSingle);
    Ok(rec)
}

/// Solves every requested scheme at every grid point and power level.
/// Records come out in grid order with P2 varying slowest.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let grid = spec.grid();
    let jobs: Vec<(f64, Point<f64>)> = spec.p2.iter().flat_map(|&p2| grid.iter().map(move |&t| (p2, t))).collect();
    jobs.into_par_iter().map(|(p2, t2)| sweep_point(spec, t2, p2)).collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header and rows of the sweep table: one row per record, one column block per scheme.
pub fn sweep_table(spec: &SweepSpec, records: &[SweepRecord]) -> (Vec<String>, Vec<Vec<String>>) {
    const FIELDS: [&str; 9] = ["r2", "feasible", "eta2", "eta3", "rho2", "rho3", "gamma", "p2_2", "p2_3"];
    let mut header: Vec<String> = ["x", "y", "p2", "decodable", "invalid"].map(String::from).to_vec();
    for s in &spec.schemes {
        header.extend(FIELDS.iter().map(|f| format!("{s}_{f}")));
    }
    header.push("diff_dpc_nodpc".into());
    header.push("diff_3ph_single".into());
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![r.t2.x.to_string(), r.t2.y.to_string(), r.p2.to_string(), r.decodable.to_string(), r.invalid.to_string()];
            for o in &r.outcomes {
                row.push(fmt_opt(o.r2));
                row.push(o.r2.is_some().to_string());
                let vals = o.params.map(|p| [p.eta2, p.eta3, p.rho2, p.rho3, p.gamma, p.p2_2, p.p2_3]);
                for k in 0..7 {
                    row.push(fmt_opt(vals.map(|v| v[k])));
                }
            }
            row.push(fmt_opt(r.diff_dpc_nodpc));
            row.push(fmt_opt(r.diff_3ph_single));
            row
        })
        .collect();
    (header, rows)
}

/// Bound-gap study: best achievable rate against the scaled outer bound over a
/// linear grid of secondary powers, at fixed gains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundGapSpec {
    pub gains: ChannelGains<f64>,
    pub p1: f64,
    pub p2_min: f64,
    pub p2_max: f64,
    pub steps: usize,
    pub outer: OuterSearchConfig,
    pub budgets: Budgets,
    pub seed: u64,
}

impl Default for BoundGapSpec {
    fn default() -> Self {
        Self {
            gains: ChannelGains::real(1.0, 0.9, 0.05, 0.5, 10.0).expect("valid gains"),
            p1: 10.0,
            p2_min: 0.0,
            p2_max: 50.0,
            steps: 26,
            outer: OuterSearchConfig::default(),
            budgets: Budgets::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRecord {
    pub p2: f64,
    /// Larger of the DPC and no-DPC three-phase optima.
    pub lb: f64,
    pub lb_dpc: Option<f64>,
    pub lb_nodpc: Option<f64>,
    pub ub: f64,
    pub ub_scaled: f64,
    pub gap: f64,
    /// `|b| <= 1` at this point.
    pub degraded: bool,
}

pub fn run_bound_gap(spec: &BoundGapSpec) -> Result<Vec<GapRecord>> {
    if spec.steps < 2 || !(spec.p2_max > spec.p2_min) || !(spec.p2_min >= 0.0) {
        return Err(Error::Usage("bound gap needs steps >= 2 and 0 <= p2_min < p2_max".into()));
    }
    let grid: Vec<f64> =
        (0..spec.steps).map(|k| spec.p2_min + (spec.p2_max - spec.p2_min) * k as f64 / (spec.steps - 1) as f64).collect();
    grid.into_par_iter()
        .map(|p2| {
            let sc = Scenario::new(spec.gains, spec.p1, p2)?;
            let eta1 = eta1_min(&sc)?;
            let lb_of = |kind| -> Result<Option<f64>> {
                Ok(solve(&OptProblem::new(sc, kind).with_budgets(spec.budgets).with_seed(spec.seed))?.r2())
            };
            let (lb_dpc, lb_nodpc) = (lb_of(SchemeKind::Dpc3Phase)?, lb_of(SchemeKind::NoDpc3Phase)?);
            let lb = lb_dpc.unwrap_or(0.0).max(lb_nodpc.unwrap_or(0.0));
            let std = standardize(&spec.gains, spec.p1, p2)?;
            let outer = r2_outer(&std, sc.r_s1_target, &spec.outer);
            let ub = outer.r2_outer.ok_or_else(|| Error::Infeasible(format!("outer bound at P2 = {p2}: {}", outer.diagnostic)))?;
            let ub_scaled = scale_ub(ub, eta1)?;
            Ok(GapRecord { p2, lb, lb_dpc, lb_nodpc, ub, ub_scaled, gap: ub_scaled - lb, degraded: std.is_degraded() })
        })
        .collect()
}

pub fn gap_table(records: &[GapRecord]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["p2", "lb", "lb_dpc", "lb_nodpc", "ub", "ub_scaled", "gap", "degraded"].map(String::from).to_vec();
    let rows = records
        .iter()
        .map(|r| {
            vec![
                r.p2.to_string(),
                r.lb.to_string(),
                fmt_opt(r.lb_dpc),
                fmt_opt(r.lb_nodpc),
                r.ub.to_string(),
                r.ub_scaled.to_string(),
                r.gap.to_string(),
                r.degraded.to_string(),
            ]
        })
        .collect();
    (header, rows)
}

/// Two power levels over the sweep grid, for the three-phase DPC scheme and
/// its single-phase restriction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerStudySpec {
    pub sweep: SweepSpec,
    pub p2_low: f64,
    pub p2_high: f64,
}

impl Default for PowerStudySpec {
    fn default() -> Self {
        Self { sweep: SweepSpec::default(), p2_low: db_to_linear(20.0), p2_high: db_to_linear(30.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerRecord {
    pub t2: Point<f64>,
    pub decodable: bool,
    pub dpc_low: Option<f64>,
    pub dpc_high: Option<f64>,
    pub sp_low: Option<f64>,
    pub sp_high: Option<f64>,
    pub delta_dpc: Option<f64>,
    pub delta_sp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerStudy {
    pub records: Vec<PowerRecord>,
    /// Median over decodable points of `delta_dpc - delta_sp`.
    pub median_advantage: Option<f64>,
    /// Points where the higher budget lost rate beyond 1e-6.
    pub monotonicity_violations: usize,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

pub fn run_power_study(spec: &PowerStudySpec) -> Result<PowerStudy> {
    let sw = &spec.sweep;
    sw.validate()?;
    let records: Vec<PowerRecord> = sw
        .grid()
        .into_par_iter()
        .map(|t2| {
            let mut rec = PowerRecord {
                t2,
                decodable: false,
                dpc_low: None,
                dpc_high: None,
                sp_low: None,
                sp_high: None,
                delta_dpc: None,
                delta_sp: None,
            };
            let low = match sw.scenario(t2, spec.p2_low) {
                Ok(sc) => sc,
                Err(Error::Domain(_)) => return Ok(rec),
                Err(e) => return Err(e),
            };
            if !low.gains.is_decodable() {
                return Ok(rec);
            }
            rec.decodable = true;
            let high = low.with_p2(spec.p2_high)?;
            let pair = |kind: SchemeKind| -> Result<(Option<f64>, Option<f64>)> {
                let lo = solve(&sw.problem(low, kind))?;
                let mut hp = sw.problem(high, kind);
                // the low-power optimum stays feasible at the higher budget
                if spec.p2_high >= spec.p2_low {
                    hp.warm_starts.extend(lo.best);
                }
                Ok((lo.r2(), solve(&hp)?.r2()))
            };
            (rec.dpc_low, rec.dpc_high) = pair(SchemeKind::Dpc3Phase)?;
            (rec.sp_low, rec.sp_high) = pair(SchemeKind::DpcSingle)?;
            rec.delta_dpc = rec.dpc_high.zip(rec.dpc_low).map(|(h, l)| h - l);
            rec.delta_sp = rec.sp_high.zip(rec.sp_low).map(|(h, l)| h - l);
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let adv: Vec<f64> = records.iter().filter_map(|r| Some(r.delta_dpc? - r.delta_sp?)).collect();
    let monotonicity_violations =
        records.iter().flat_map(|r| [r.delta_dpc, r.delta_sp]).flatten().filter(|d| *d < -1e-6).count();
    Ok(PowerStudy { records, median_advantage: median(adv), monotonicity_violations })
}

pub fn power_table(study: &PowerStudy) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["x", "y", "decodable", "dpc_low", "dpc_high", "sp_low", "sp_high", "delta_dpc", "delta_sp"]
        .map(String::from)
        .to_vec();
    let rows = study
        .records
        .iter()
        .map(|r| {
            vec![
                r.t2.x.to_string(),
                r.t2.y.to_string(),
                r.decodable.to_string(),
                fmt_opt(r.dpc_low),
                fmt_opt(r.dpc_high),
                fmt_opt(r.sp_low),
                fmt_opt(r.sp_high),
                fmt_opt(r.delta_dpc),
                fmt_opt(r.delta_sp),
            ]
        })
        .collect();
    (header, rows)
}

/// Degrees-of-freedom study along a log-spaced grid of secondary powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofSpec {
    /// T2 position of the geometric scenario used for both slopes.
    pub t2: Point<f64>,
    pub p1: f64,
    pub p2_grid: Vec<f64>,
    /// Positions probed for the jamming share at `rho_check_p2`.
    pub rho_points: Vec<Point<f64>>,
    pub rho_check_p2: f64,
    pub outer: OuterSearchConfig,
    pub budgets: Budgets,
    pub seed: u64,
}

impl Default for DofSpec {
    fn default() -> Self {
        Self {
            t2: Point::new(0.5, 0.0),
            p1: 10.0,
            p2_grid: (2..=8).map(|k| 10f64.powi(k)).collect(),
            rho_points: [(0.5, 0.0), (0.6, 0.0), (0.7, 0.0), (0.8, 0.0), (0.5, 0.2), (0.6, -0.2)]
                .map(|(x, y)| Point::new(x, y))
                .to_vec(),
            rho_check_p2: 1e4,
            outer: OuterSearchConfig::default(),
            budgets: Budgets::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoObservation {
    pub t2: Point<f64>,
    /// Jamming share of the DPC optimum; `None` when the point is infeasible.
    pub rho2: Option<f64>,
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofStudy {
    pub ub: DofEstimate<f64>,
    pub lb: DofEstimate<f64>,
    /// `1 - eta1*` of the scenario, the expected achievable slope.
    pub eta2: f64,
    pub rho: Vec<RhoObservation>,
}

fn geometric(t2: Point<f64>, p1: f64, p2: f64) -> Result<Scenario<f64>> {
    Scenario::new(gains_from_geometry(&Geometry::reference(t2)?, Normalization::Normalized)?, p1, p2)
}

pub fn run_dof_study(spec: &DofSpec) -> Result<DofStudy> {
    let base = geometric(spec.t2, spec.p1, 0.0)?;
    let ub = dof_ub(|p2| standardize(&base.gains, spec.p1, p2), base.r_s1_target, &spec.p2_grid, &spec.outer)?;
    let template = OptProblem::new(base, SchemeKind::Dpc3Phase).with_budgets(spec.budgets).with_seed(spec.seed);
    let lb = dof_lb(|p2| base.with_p2(p2), &spec.p2_grid, &template)?;
    let rho = spec
        .rho_points
        .par_iter()
        .map(|&t2| {
            let sc = geometric(t2, spec.p1, spec.rho_check_p2)?;
            let r = solve(&OptProblem { scenario: sc, ..template.clone() })?;
            Ok(RhoObservation { t2, rho2: r.best.map(|p| p.rho2), r2: r.r2() })
        })
        .collect::<Result<_>>()?;
    Ok(DofStudy { ub, lb, eta2: 1.0 - eta1_min(&base)?, rho })
}

pub fn dof_table(study: &DofStudy) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["kind", "x", "y", "p2", "value"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for (kind, est) in [("ub", &study.ub), ("lb", &study.lb)] {
        for (p2, r) in &est.points {
            rows.push(vec![format!("{kind}_rate"), String::new(), String::new(), p2.to_string(), r.to_string()]);
        }
        rows.push(vec![format!("{kind}_slope"), String::new(), String::new(), String::new(), est.slope.to_string()]);
    }
    rows.push(vec!["eta2".into(), String::new(), String::new(), String::new(), study.eta2.to_string()]);
    for o in &study.rho {
        rows.push(vec!["rho2".into(), o.t2.x.to_string(), o.t2.y.to_string(), String::new(), fmt_opt(o.rho2)]);
    }
    (header, rows)
}

/// First 16 hex digits of the SHA-256 of the spec's JSON form.
pub fn spec_hash<S: Serialize>(spec: &S) -> Result<String> {
    let json = serde_json::to_vec(spec).map_err(|e| Error::Invalid(format!("cannot serialize spec: {e}")))?;
    Ok(hex::encode(Sha256::digest(&json))[..16].to_string())
}

/// Writes `<experiment>_<hash>.csv` into `dir` and returns its path.
pub fn write_csv<S: Serialize>(
    dir: &Path,
    experiment: &str,
    spec: &S,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{experiment}_{}.csv", spec_hash(spec)?));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    fs::File::create(&path)?.write_all(&bytes)?;
    Ok(path)
}
