use std::io::Write;
use std::path::{Path, PathBuf};

use cogsec::awgn::{baseline_secrecy_rate, eta1_min, rate, Coding};
use cogsec::channel::ChannelGains;
use cogsec::experiments::{
    dof_table, gap_table, run_bound_gap, run_dof_study, run_sweep, sweep_table, write_csv, Axis, BoundGapSpec, DofSpec,
    SweepSpec,
};
use cogsec::info::{dmc_outer_bound, theorem1_from_joints};
use cogsec::optimize::{solve, OptProblem, OptStatus};
use cogsec::{JointPmf, MiTerms, RateReport, SchemeParams};
use log::info;
use serde::Serialize;

use crate::config::{CodingChoice, Eta1, RunConfig};
use crate::error::{CliError, CliResult};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Context {
    fn seed(&self, cfg: &RunConfig) -> u64 {
        self.seed.unwrap_or(cfg.optimizer.seed)
    }

    fn out_dir(&self, cfg: &RunConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| cfg.output_dir.clone())
    }

    fn out_dir_or_cwd(&self, cfg: &RunConfig) -> PathBuf {
        self.out_dir(cfg).unwrap_or_else(|| PathBuf::from("."))
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn emit<S: Serialize>(dir: &Path, name: &str, spec: &S, table: (Vec<String>, Vec<Vec<String>>)) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = write_csv(dir, name, spec, &table.0, &table.1).map_err(CliError::from_core)?;
    info!("wrote {}", path.display());
    Ok(path)
}

/// Fixed-point rendering that prints values below the last digit as plain zero.
pub fn fmt12(x: f64) -> String {
    if x.abs() < 5e-13 {
        format!("{:.12}", 0.0)
    } else {
        format!("{x:.12}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

fn write_report(w: &mut dyn Write, label: &str, r: &RateReport) -> std::io::Result<()> {
    writeln!(w, "[{label}]")?;
    writeln!(w, "r2 = {:.6}", r.r2)?;
    writeln!(w, "feasible = {}", r.feasible)?;
    writeln!(w, "residual_reliability = {:.3e}", r.residual_reliability)?;
    writeln!(w, "residual_secrecy = {:.3e}", r.residual_secrecy)?;
    writeln!(w, "secondary_power = {:.6}", r.secondary_power)?;
    writeln!(w, "mmse_alpha = {:.6}", r.mmse_alpha)?;
    for (name, v) in r.terms.named() {
        writeln!(w, "{name} = {v:.6}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RatesSpec<'a> {
    scenario: &'a cogsec::Scenario,
    params: &'a SchemeParams,
}

/// Evaluates one parameter point and prints the listening time, rates,
/// residuals and the ten mutual information terms.
pub fn cmd_rates(cfg: &RunConfig, ctx: &Context, w: &mut dyn Write) -> CliResult<()> {
    let sc = cfg.scenario()?;
    let e1 = eta1_min(&sc).map_err(CliError::from_core)?;
    writeln!(w, "eta1_star = {e1:.6}").map_err(io)?;
    writeln!(w, "baseline_secrecy_rate = {:.6}", baseline_secrecy_rate(&sc)).map_err(io)?;
    writeln!(w, "target_secrecy_rate = {:.6}", sc.r_s1_target).map_err(io)?;

    let (params, codings) = match &cfg.params {
        Some(p) => {
            let eta1 = match p.eta1 {
                Eta1::Min => e1,
                Eta1::Value(v) => v,
            };
            let params = SchemeParams::new(eta1, p.eta2, p.rho2, p.rho3, p.gamma, p.p2_2, p.p2_3)
                .map_err(|e| CliError::config(format!("[params] {e}")))?;
            let codings = match p.coding {
                CodingChoice::Dpc => vec![Coding::Dpc],
                CodingChoice::NoDpc => vec![Coding::NoDpc],
                CodingChoice::Both => vec![Coding::Dpc, Coding::NoDpc],
            };
            (params, codings)
        }
        None => (SchemeParams::silent(e1, 0.0).map_err(CliError::from_core)?, vec![Coding::Dpc, Coding::NoDpc]),
    };
    let reports: Vec<RateReport> = codings.iter().map(|&c| rate(&sc, &params, c)).collect();
    for r in &reports {
        let label = match r.coding {
            Coding::Dpc => "dpc",
            Coding::NoDpc => "nodpc",
        };
        write_report(w, label, r).map_err(io)?;
    }

    if let Some(dir) = ctx.out_dir(cfg) {
        let mut header: Vec<String> =
            ["coding", "r2", "feasible", "residual_reliability", "residual_secrecy", "secondary_power", "mmse_alpha"]
                .map(String::from)
                .to_vec();
        header.extend(MiTerms::NAMES.iter().map(|s| s.to_string()));
        let rows = reports
            .iter()
            .map(|r| {
                let mut row = vec![
                    format!("{:?}", r.coding).to_ascii_lowercase(),
                    r.r2.to_string(),
                    r.feasible.to_string(),
                    r.residual_reliability.to_string(),
                    r.residual_secrecy.to_string(),
                    r.secondary_power.to_string(),
                    r.mmse_alpha.to_string(),
                ];
                row.extend(r.terms.values().iter().map(|v| v.to_string()));
                row
            })
            .collect();
        let path = emit(&dir, "rates", &RatesSpec { scenario: &sc, params: &params }, (header, rows))?;
        writeln!(w, "csv = {}", path.display()).map_err(io)?;
    }
    Ok(())
}

fn problem(cfg: &RunConfig, ctx: &Context) -> CliResult<OptProblem> {
    let o = &cfg.optimizer;
    let mut prob = OptProblem::new(cfg.scenario()?, o.scheme)
        .with_seed(ctx.seed(cfg))
        .with_budgets(o.budgets)
        .with_pins(o.pins);
    prob.tolerances = o.tolerances;
    prob.nest_single = o.nest_single;
    prob.validate().map_err(|e| CliError::config(format!("[optimizer] {e}")))?;
    Ok(prob)
}

/// Runs the multi-start search, prints the optimum and writes the per-start trace.
pub fn cmd_optimize(cfg: &RunConfig, ctx: &Context, w: &mut dyn Write) -> CliResult<()> {
    let prob = problem(cfg, ctx)?;
    let res = solve(&prob).map_err(CliError::from_core)?;
    let status = match res.status {
        OptStatus::FeasibleOpt => "FEASIBLE_OPT",
        OptStatus::NoFeasiblePoint => "NO_FEASIBLE_POINT",
    };
    writeln!(w, "scheme = {}", res.scheme).map_err(io)?;
    writeln!(w, "status = {status}").map_err(io)?;
    if let (Some(p), Some(r)) = (&res.best, &res.report) {
        writeln!(w, "r2 = {:.6}", r.r2).map_err(io)?;
        for (k, v) in [
            ("eta1", p.eta1),
            ("eta2", p.eta2),
            ("eta3", p.eta3),
            ("rho2", p.rho2),
            ("rho3", p.rho3),
            ("gamma", p.gamma),
            ("p2_2", p.p2_2),
            ("p2_3", p.p2_3),
        ] {
            writeln!(w, "{k} = {v:.6}").map_err(io)?;
        }
        writeln!(w, "average_power = {:.6}", p.average_power()).map_err(io)?;
        writeln!(w, "power_binding = {}", res.power_binding).map_err(io)?;
        writeln!(w, "interior_optimum = {}", res.interior_optimum).map_err(io)?;
    }
    if let Some(d) = &res.diagnostic {
        writeln!(w, "diagnostic = {d}").map_err(io)?;
    }

    let header = ["index", "origin", "r2", "evals", "final_step", "power_binding"].map(String::from).to_vec();
    let rows = res
        .trace
        .iter()
        .map(|s| {
            vec![
                s.index.to_string(),
                format!("{:?}", s.origin).to_ascii_lowercase(),
                s.r2.map_or_else(String::new, |v| v.to_string()),
                s.evals.to_string(),
                s.final_step.to_string(),
                s.power_binding.to_string(),
            ]
        })
        .collect();
    let path = emit(&ctx.out_dir_or_cwd(cfg), "optimize", &prob, (header, rows))?;
    writeln!(w, "trace = {}", path.display()).map_err(io)?;

    match res.status {
        OptStatus::FeasibleOpt => Ok(()),
        OptStatus::NoFeasiblePoint => Err(CliError::Infeasible(res.diagnostic.unwrap_or_else(|| "no feasible point".into()))),
    }
}

fn sweep_spec(cfg: &RunConfig, ctx: &Context) -> CliResult<SweepSpec> {
    let mut spec = SweepSpec::default();
    if let Some(s) = &cfg.scenario {
        spec.p1 = s.p1;
        spec.p2 = vec![s.p2];
        spec.r_s1_target = s.r_s1_target;
        spec.normalization = s.normalization;
        if let Some(g) = s.geometry() {
            spec.t1 = g.t1;
            spec.u1 = g.u1;
            spec.u2 = g.u2;
            spec.pathloss_exponent = g.pathloss_exponent;
        } else if s.source.is_some() {
            return Err(CliError::config("[gains]: a sweep moves T2, so it needs [geometry] instead"));
        }
    }
    if let Some(b) = &cfg.sweep {
        spec.x = Axis { min: b.x.0, max: b.x.1 };
        spec.y = Axis { min: b.y.0, max: b.y.1 };
        spec.step = b.step;
        spec.schemes = b.schemes.clone();
        if let Some(p2) = &b.p2 {
            spec.p2 = p2.clone();
        }
    }
    spec.budgets = cfg.optimizer.budgets;
    spec.seed = ctx.seed(cfg);
    spec.validate().map_err(|e| CliError::config(format!("[sweep] {e}")))?;
    Ok(spec)
}

/// Optimizes every scheme at every grid position of T2.
pub fn cmd_sweep(cfg: &RunConfig, ctx: &Context, w: &mut dyn Write) -> CliResult<()> {
    let spec = sweep_spec(cfg, ctx)?;
    let records = run_sweep(&spec).map_err(CliError::from_core)?;
    let decodable = records.iter().filter(|r| r.decodable).count();
    let path = emit(&ctx.out_dir_or_cwd(cfg), "sweep", &spec, sweep_table(&spec, &records))?;
    writeln!(w, "records = {}", records.len()).map_err(io)?;
    writeln!(w, "decodable = {decodable}").map_err(io)?;
    writeln!(w, "csv = {}", path.display()).map_err(io)?;
    Ok(())
}

fn scenario_gains(cfg: &RunConfig) -> CliResult<Option<ChannelGains<f64>>> {
    match &cfg.scenario {
        Some(s) => s.gains(),
        None => Ok(None),
    }
}

/// Lower bound, scaled outer bound and their gap along a grid of `P2`.
pub fn cmd_boundgap(cfg: &RunConfig, ctx: &Context, w: &mut dyn Write) -> CliResult<()> {
    let mut spec = BoundGapSpec::default();
    if let Some(g) = scenario_gains(cfg)? {
        spec.gains = g;
    }
    if let Some(s) = &cfg.scenario {
        spec.p1 = s.p1;
    }
    if let Some(b) = &cfg.boundgap {
        spec.p2_min = b.p2_min;
        spec.p2_max = b.p2_max;
        spec.steps = b.steps;
    }
    if spec.steps == 0 || !(spec.p2_max >= spec.p2_min) {
        return Err(CliError::config("[boundgap] needs steps >= 1 and p2_max >= p2_min"));
    }
    spec.outer = cfg.outer;
    spec.budgets = cfg.optimizer.budgets;
    spec.seed = ctx.seed(cfg);
    spec.outer.seed = spec.seed;
    let records = run_bound_gap(&spec).map_err(CliError::from_core)?;
    writeln!(w, "{:>10} {:>10} {:>10} {:>10}", "p2", "lb", "ub_scaled", "gap").map_err(io)?;
    for r in &records {
        writeln!(w, "{:>10.4} {:>10.6} {:>10.6} {:>10.6}", r.p2, r.lb, r.ub_scaled, r.gap).map_err(io)?;
    }
    let max = records.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max);
    let min = records.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let path = emit(&ctx.out_dir_or_cwd(cfg), "boundgap", &spec, gap_table(&records))?;
    writeln!(w, "max_gap = {max:.6}").map_err(io)?;
    writeln!(w, "min_gap = {min:.6}").map_err(io)?;
    writeln!(w, "csv = {}", path.display()).map_err(io)?;
    Ok(())
}

/// Degrees-of-freedom slopes of both bounds and the jamming share at high power.
pub fn cmd_dof(cfg: &RunConfig, ctx: &Context, w: &mut dyn Write) -> CliResult<()> {
    let mut spec = DofSpec::default();
    if let Some(s) = &cfg.scenario {
        spec.p1 = s.p1;
        if let Some(g) = s.geometry() {
            spec.t2 = g.t2;
        } else if s.source.is_some() {
            return Err(CliError::config("[gains]: the DoF study is defined on a geometry; use [geometry]"));
        }
    }
    if let Some(d) = &cfg.dof {
        if let Some(g) = &d.p2_grid {
            spec.p2_grid = g.clone();
        }
        if let Some(p) = &d.rho_points {
            spec.rho_points = p.clone();
        }
        if let Some(p) = d.rho_check_p2 {
            spec.rho_check_p2 = p;
        }
    }
    spec.outer = cfg.outer;
    spec.budgets = cfg.optimizer.budgets;
    spec.seed = ctx.seed(cfg);
    spec.outer.seed = spec.seed;
    let study = run_dof_study(&spec).map_err(CliError::from_core)?;
    writeln!(w, "ub_slope = {:.6}", study.ub.slope).map_err(io)?;
    writeln!(w, "lb_slope = {:.6}", study.lb.slope).map_err(io)?;
    writeln!(w, "eta2 = {:.6}", study.eta2).map_err(io)?;
    for r in &study.rho {
        writeln!(w, "rho2 at ({}, {}) = {} (r2 = {})", r.t2.x, r.t2.y, fmt_opt(r.rho2), fmt_opt(r.r2)).map_err(io)?;
    }
    let path = emit(&ctx.out_dir_or_cwd(cfg), "dof", &spec, dof_table(&study))?;
    writeln!(w, "csv = {}", path.display()).map_err(io)?;
    Ok(())
}

fn load_pmf(path: &Path, field: &str) -> CliResult<JointPmf> {
    JointPmf::from_csv_path(path).map_err(|e| CliError::config(format!("[dmc] {field}: {e}")))
}

#[derive(Serialize)]
struct DmcSpec {
    active: Vec<f64>,
    silent: Vec<f64>,
    outer: Option<Vec<f64>>,
    r_s1_target: Option<f64>,
}

/// Single-phase DMC rates from PMF files, plus the outer bound when a joint
/// law over `U, V, X1, X2, Y1, Y2` is supplied.
pub fn cmd_dmc(cfg: &RunConfig, ctx: &Context, w: &mut dyn Write) -> CliResult<()> {
    let d = cfg.dmc.as_ref().ok_or_else(|| CliError::config("[dmc]: missing section"))?;
    let active = load_pmf(&d.active, "active")?;
    let silent = load_pmf(&d.silent, "silent")?;
    let r = theorem1_from_joints(&active, &silent).map_err(|e| CliError::config(format!("[dmc] {e}")))?;
    let mut lines = vec![
        ("r2", fmt12(r.r2)),
        ("r_s1", fmt12(r.r_s1)),
        ("r_s1_prime", fmt12(r.r_s1_prime)),
        ("reliability_slack", fmt12(r.residuals.reliability_slack)),
        ("secrecy_residual", fmt12(r.residuals.secrecy_residual)),
        ("feasible", r.feasible().to_string()),
    ];
    let outer = match &d.outer {
        Some(p) => {
            let joint = load_pmf(p, "outer")?;
            let target = d.r_s1_target.unwrap_or(r.r_s1.max(0.0));
            let b = dmc_outer_bound(&joint, target).map_err(|e| CliError::config(format!("[dmc] outer: {e}")))?;
            lines.push(("outer_r_s1_ub", fmt12(b.r_s1_ub)));
            lines.push(("outer_r2_ub", fmt12(b.r2_ub)));
            lines.push(("outer_degradation_residual", format!("{:.3e}", b.degradation_residual)));
            Some(joint)
        }
        None => None,
    };
    for (k, v) in &lines {
        writeln!(w, "{k} = {v}").map_err(io)?;
    }
    if let Some(dir) = ctx.out_dir(cfg) {
        let spec = DmcSpec {
            active: active.probs().to_vec(),
            silent: silent.probs().to_vec(),
            outer: outer.map(|j| j.probs().to_vec()),
            r_s1_target: d.r_s1_target,
        };
        let header = lines.iter().map(|(k, _)| k.to_string()).collect();
        let row = lines.into_iter().map(|(_, v)| v).collect();
        let path = emit(&dir, "dmc", &spec, (header, vec![row]))?;
        writeln!(w, "csv = {}", path.display()).map_err(io)?;
    }
    Ok(())
}

