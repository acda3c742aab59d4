//! INI run configuration. Every power carries an explicit `db` or `lin` suffix.

use std::path::{Path, PathBuf};

use cogsec::bounds::OuterSearchConfig;
use cogsec::channel::{gains_from_geometry, ChannelGains, Geometry, Normalization, Point};
use cogsec::optimize::{Budgets, Pins, SchemeKind, Tolerances};
use cogsec::Scenario;
use ini::{Ini, Properties};
use num_complex::Complex;

use crate::error::{CliError, CliResult};

const KNOWN: &[(&str, &[&str])] = &[
    ("scenario", &["p1", "p2", "r_s1_target", "normalization"]),
    ("geometry", &["t1", "u1", "t2", "u2", "pathloss_exponent"]),
    ("gains", &["c11", "c12", "c21", "c22", "ctt"]),
    ("params", &["eta1", "eta2", "rho2", "rho3", "gamma", "p2_2", "p2_3", "coding"]),
    (
        "optimizer",
        &[
            "scheme",
            "starts",
            "evals_per_start",
            "feasibility_tol",
            "convergence_tol",
            "seed",
            "nest_single",
            "pin_eta2",
            "pin_rho2",
            "pin_rho3",
            "pin_p2_2",
            "pin_p2_3",
        ],
    ),
    ("sweep", &["x_min", "x_max", "y_min", "y_max", "step", "schemes", "p2"]),
    ("boundgap", &["p2_min", "p2_max", "steps"]),
    ("outer", &["samples", "eps", "refine_top", "refine_sweeps", "complex_rho"]),
    ("dof", &["p2_grid", "rho_points", "rho_check_p2"]),
    ("dmc", &["active", "silent", "outer", "r_s1_target"]),
    ("output", &["dir"]),
];

/// Where the link gains come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GainSource {
    Geometry(Geometry<f64>),
    Raw(ChannelGains<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBlock {
    pub source: Option<GainSource>,
    pub normalization: Normalization,
    pub p1: f64,
    pub p2: f64,
    pub r_s1_target: Option<f64>,
}

/// `eta1` may be pinned to the shortest decodable listening time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eta1 {
    Min,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingChoice {
    Dpc,
    NoDpc,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsBlock {
    pub eta1: Eta1,
    pub eta2: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub gamma: f64,
    pub p2_2: f64,
    pub p2_3: f64,
    pub coding: CodingChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerBlock {
    pub scheme: SchemeKind,
    pub budgets: Budgets,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub nest_single: bool,
    pub pins: Pins,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub step: f64,
    pub schemes: Vec<SchemeKind>,
    pub p2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundGapBlock {
    pub p2_min: f64,
    pub p2_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofBlock {
    pub p2_grid: Option<Vec<f64>>,
    pub rho_points: Option<Vec<Point<f64>>>,
    pub rho_check_p2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmcBlock {
    pub active: PathBuf,
    pub silent: PathBuf,
    pub outer: Option<PathBuf>,
    pub r_s1_target: Option<f64>,
}

/// Parsed configuration; sections absent from the file stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<ScenarioBlock>,
    pub params: Option<ParamsBlock>,
    pub optimizer: OptimizerBlock,
    pub sweep: Option<SweepBlock>,
    pub boundgap: Option<BoundGapBlock>,
    pub outer: OuterSearchConfig,
    pub dof: Option<DofBlock>,
    pub dmc: Option<DmcBlock>,
    pub output_dir: Option<PathBuf>,
}

struct Section<'a> {
    name: &'static str,
    props: &'a Properties,
}

impl<'a> Section<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.props.get(key).map(str::trim)
    }

    fn err(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::config(format!("[{}] {key}: {msg}", self.name))
    }

    fn required(&self, key: &str) -> CliResult<&'a str> {
        self.raw(key).ok_or_else(|| self.err(key, "missing"))
    }

    fn number(&self, key: &str) -> CliResult<Option<f64>> {
        self.raw(key).map(|v| parse_number(v).map_err(|m| self.err(key, m))).transpose()
    }

    fn number_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn count(&self, key: &str) -> CliResult<Option<usize>> {
        self.raw(key).map(|v| v.parse::<usize>().map_err(|_| self.err(key, format!("expected a count, got {v:?}")))).transpose()
    }

    fn power(&self, key: &str) -> CliResult<Option<f64>> {
        self.raw(key).map(|v| parse_power(v).map_err(|m| self.err(key, m))).transpose()
    }

    fn powers(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| v.split(',').map(|p| parse_power(p).map_err(|m| self.err(key, m))).collect())
            .transpose()
    }

    fn point(&self, key: &str) -> CliResult<Option<Point<f64>>> {
        self.raw(key).map(|v| parse_point(v).map_err(|m| self.err(key, m))).transpose()
    }

    fn flag(&self, key: &str) -> CliResult<Option<bool>> {
        self.raw(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(self.err(key, format!("expected true or false, got {v:?}"))),
            })
            .transpose()
    }
}

/// Drops trailing comments introduced by whitespace followed by `;` or `#`.
fn strip_inline_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let cut = line
            .char_indices()
            .find(|&(i, c)| (c == ';' || c == '#') && i > 0 && line[..i].ends_with(char::is_whitespace))
            .map_or(line.len(), |(i, _)| i);
        out.push_str(line[..cut].trim_end());
        out.push('\n');
    }
    out
}

fn parse_number(v: &str) -> Result<f64, String> {
    let x: f64 = v.trim().parse().map_err(|_| format!("expected a number, got {v:?}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got {v:?}"))
    }
}

/// `"20 db"` or `"100 lin"`; a bare number is rejected.
pub fn parse_power(v: &str) -> Result<f64, String> {
    let s = v.trim().to_ascii_lowercase();
    let (num, db) = if let Some(n) = s.strip_suffix("db") {
        (n, true)
    } else if let Some(n) = s.strip_suffix("lin") {
        (n, false)
    } else {
        return Err(format!("power {v:?} needs a `db` or `lin` suffix"));
    };
    let x = parse_number(num)?;
    let p = if db { cogsec::experiments::db_to_linear(x) } else { x };
    if p < 0.0 {
        return Err(format!("power {v:?} is negative"));
    }
    Ok(p)
}

fn parse_point(v: &str) -> Result<Point<f64>, String> {
    let parts: Vec<&str> = v.split(',').collect();
    match parts.as_slice() {
        [x, y] => Ok(Point::new(parse_number(x)?, parse_number(y)?)),
        _ => Err(format!("expected `x, y`, got {v:?}")),
    }
}

/// `"re"` or `"re, im"`.
fn parse_complex(v: &str) -> Result<Complex<f64>, String> {
    let parts: Vec<&str> = v.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex::new(parse_number(re)?, 0.0)),
        [re, im] => Ok(Complex::new(parse_number(re)?, parse_number(im)?)),
        _ => Err(format!("expected `re` or `re, im`, got {v:?}")),
    }
}

fn parse_scheme(v: &str) -> Result<SchemeKind, String> {
    v.trim().parse::<SchemeKind>().map_err(|e| e.to_string())
}

impl RunConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_str_in(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses `text`; relative file paths resolve against `base`.
    pub fn from_str_in(text: &str, base: &Path) -> CliResult<Self> {
        let ini = Ini::load_from_str(&strip_inline_comments(text)).map_err(|e| CliError::config(format!("malformed config: {e}")))?;
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(CliError::config(format!("key {k:?} outside any section")));
                }
                continue;
            };
            let Some((_, keys)) = KNOWN.iter().find(|(s, _)| *s == name) else {
                return Err(CliError::config(format!("unknown section [{name}]")));
            };
            if let Some((k, _)) = props.iter().find(|(k, _)| !keys.contains(k)) {
                return Err(CliError::config(format!("[{name}] {k}: unknown key")));
            }
        }
        let section = |name: &'static str| ini.section(Some(name)).map(|props| Section { name, props });

        let geometry = section("geometry").map(|s| geometry_block(&s)).transpose()?;
        let gains = section("gains").map(|s| gains_block(&s)).transpose()?;
        let source = match (geometry, gains) {
            (Some(_), Some(_)) => {
                return Err(CliError::config("[geometry] and [gains] are mutually exclusive; give exactly one"));
            }
            (Some(g), None) => Some(GainSource::Geometry(g)),
            (None, Some(g)) => Some(GainSource::Raw(g)),
            (None, None) => None,
        };
        let scenario = match section("scenario") {
            Some(s) => Some(scenario_block(&s, source)?),
            None if source.is_some() => return Err(CliError::config("[scenario]: missing section (needs p1 and p2)")),
            None => None,
        };

        let mut outer = OuterSearchConfig::default();
        if let Some(s) = section("outer") {
            outer.samples = s.count("samples")?.unwrap_or(outer.samples);
            outer.eps = s.number_or("eps", outer.eps)?;
            outer.refine_top = s.count("refine_top")?.unwrap_or(outer.refine_top);
            outer.refine_sweeps = s.count("refine_sweeps")?.unwrap_or(outer.refine_sweeps);
            outer.complex_rho = s.flag("complex_rho")?.unwrap_or(outer.complex_rho);
        }

        Ok(Self {
            scenario,
            params: section("params").map(|s| params_block(&s)).transpose()?,
            optimizer: match section("optimizer") {
                Some(s) => optimizer_block(&s)?,
                None => OptimizerBlock::default(),
            },
            sweep: section("sweep").map(|s| sweep_block(&s)).transpose()?,
            boundgap: section("boundgap").map(|s| boundgap_block(&s)).transpose()?,
            outer,
            dof: section("dof").map(|s| dof_block(&s)).transpose()?,
            dmc: section("dmc").map(|s| dmc_block(&s, base)).transpose()?,
            output_dir: section("output").and_then(|s| s.raw("dir")).map(|d| base.join(d)),
        })
    }

    /// Builds the scenario; fails when neither gain source is given.
    pub fn scenario(&self) -> CliResult<Scenario> {
        let block = self.scenario.as_ref().ok_or_else(|| CliError::config("[scenario]: missing section"))?;
        let gains = block.gains()?.ok_or_else(|| CliError::config("exactly one of [geometry] or [gains] is required"))?;
        let sc = Scenario::new(gains, block.p1, block.p2).map_err(|e| CliError::config(format!("[scenario] {e}")))?;
        match block.r_s1_target {
            Some(t) => sc.with_target(t).map_err(|e| CliError::config(format!("[scenario] r_s1_target: {e}"))),
            None => Ok(sc),
        }
    }
}

impl ScenarioBlock {
    pub fn gains(&self) -> CliResult<Option<ChannelGains<f64>>> {
        match &self.source {
            None => Ok(None),
            Some(GainSource::Raw(g)) => Ok(Some(*g)),
            Some(GainSource::Geometry(geo)) => gains_from_geometry(geo, self.normalization)
                .map(Some)
                .map_err(|e| CliError::config(format!("[geometry] {e}"))),
        }
    }

    pub fn geometry(&self) -> Option<&Geometry<f64>> {
        match &self.source {
            Some(GainSource::Geometry(g)) => Some(g),
            _ => None,
        }
    }
}

impl Default for OptimizerBlock {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Dpc3Phase,
            budgets: Budgets::default(),
            tolerances: Tolerances::default(),
            seed: 0,
            nest_single: true,
            pins: Pins::default(),
        }
    }
}

fn geometry_block(s: &Section) -> CliResult<Geometry<f64>> {
    let t1 = s.point("t1")?.unwrap_or(Point::new(0.0, 0.0));
    let u1 = s.point("u1")?.unwrap_or(Point::new(1.0, 0.0));
    let u2 = s.point("u2")?.unwrap_or(Point::new(1.0, -1.0));
    let t2 = s.point("t2")?.ok_or_else(|| s.err("t2", "missing"))?;
    let exp = s.number_or("pathloss_exponent", 3.0)?;
    Geometry::new(t1, u1, t2, u2, exp).map_err(|e| s.err("t2", e))
}

fn gains_block(s: &Section) -> CliResult<ChannelGains<f64>> {
    let get = |k: &str| -> CliResult<Complex<f64>> { parse_complex(s.required(k)?).map_err(|m| s.err(k, m)) };
    ChannelGains::new(get("c11")?, get("c12")?, get("c21")?, get("c22")?, get("ctt")?).map_err(|e| s.err("c11", e))
}

fn scenario_block(s: &Section, source: Option<GainSource>) -> CliResult<ScenarioBlock> {
    let normalization = match s.raw("normalization").map(str::to_ascii_lowercase).as_deref() {
        None | Some("normalized") => Normalization::Normalized,
        Some("raw") => Normalization::Raw,
        Some(v) => return Err(s.err("normalization", format!("expected normalized or raw, got {v:?}"))),
    };
    let p1 = s.power("p1")?.ok_or_else(|| s.err("p1", "missing"))?;
    if p1 <= 0.0 {
        return Err(s.err("p1", "must be positive"));
    }
    Ok(ScenarioBlock {
        source,
        normalization,
        p1,
        p2: s.power("p2")?.ok_or_else(|| s.err("p2", "missing"))?,
        r_s1_target: s.number("r_s1_target")?,
    })
}

fn params_block(s: &Section) -> CliResult<ParamsBlock> {
    let eta1 = match s.raw("eta1") {
        None => Eta1::Min,
        Some(v) if v.eq_ignore_ascii_case("min") => Eta1::Min,
        Some(v) => Eta1::Value(parse_number(v).map_err(|m| s.err("eta1", m))?),
    };
    let coding = match s.raw("coding").map(str::to_ascii_lowercase).as_deref() {
        None | Some("both") => CodingChoice::Both,
        Some("dpc") => CodingChoice::Dpc,
        Some("nodpc") => CodingChoice::NoDpc,
        Some(v) => return Err(s.err("coding", format!("expected dpc, nodpc or both, got {v:?}"))),
    };
    Ok(ParamsBlock {
        eta1,
        eta2: s.number_or("eta2", 0.0)?,
        rho2: s.number_or("rho2", 0.0)?,
        rho3: s.number_or("rho3", 0.0)?,
        gamma: s.number_or("gamma", 0.0)?,
        p2_2: s.power("p2_2")?.unwrap_or(0.0),
        p2_3: s.power("p2_3")?.unwrap_or(0.0),
        coding,
    })
}

fn optimizer_block(s: &Section) -> CliResult<OptimizerBlock> {
    let d = OptimizerBlock::default();
    let scheme = match s.raw("scheme") {
        Some(v) => parse_scheme(v).map_err(|m| s.err("scheme", m))?,
        None => d.scheme,
    };
    let seed = match s.raw("seed") {
        Some(v) => v.parse::<u64>().map_err(|_| s.err("seed", format!("expected an unsigned integer, got {v:?}")))?,
        None => d.seed,
    };
    Ok(OptimizerBlock {
        scheme,
        budgets: Budgets {
            starts: s.count("starts")?.unwrap_or(d.budgets.starts),
            evals_per_start: s.count("evals_per_start")?.unwrap_or(d.budgets.evals_per_start),
        },
        tolerances: Tolerances {
            feasibility: s.number_or("feasibility_tol", d.tolerances.feasibility)?,
            convergence: s.number_or("convergence_tol", d.tolerances.convergence)?,
        },
        seed,
        nest_single: s.flag("nest_single")?.unwrap_or(d.nest_single),
        pins: Pins {
            eta2: s.number("pin_eta2")?,
            rho2: s.number("pin_rho2")?,
            rho3: s.number("pin_rho3")?,
            p2_2: s.power("pin_p2_2")?,
            p2_3: s.power("pin_p2_3")?,
        },
    })
}

fn sweep_block(s: &Section) -> CliResult<SweepBlock> {
    let schemes = match s.raw("schemes") {
        Some(v) => v.split(',').map(|x| parse_scheme(x).map_err(|m| s.err("schemes", m))).collect::<CliResult<_>>()?,
        None => SchemeKind::ALL.to_vec(),
    };
    Ok(SweepBlock {
        x: (s.number_or("x_min", -0.5)?, s.number_or("x_max", 1.5)?),
        y: (s.number_or("y_min", -0.5)?, s.number_or("y_max", 1.5)?),
        step: s.number_or("step", 0.05)?,
        schemes,
        p2: s.powers("p2")?,
    })
}

fn boundgap_block(s: &Section) -> CliResult<BoundGapBlock> {
    Ok(BoundGapBlock {
        p2_min: s.power("p2_min")?.unwrap_or(0.0),
        p2_max: s.power("p2_max")?.unwrap_or(50.0),
        steps: s.count("steps")?.unwrap_or(26),
    })
}

fn dof_block(s: &Section) -> CliResult<DofBlock> {
    let rho_points = s
        .raw("rho_points")
        .map(|v| v.split(';').map(|p| parse_point(p).map_err(|m| s.err("rho_points", m))).collect::<CliResult<Vec<_>>>())
        .transpose()?;
    Ok(DofBlock { p2_grid: s.powers("p2_grid")?, rho_points, rho_check_p2: s.power("rho_check_p2")? })
}

fn dmc_block(s: &Section, base: &Path) -> CliResult<DmcBlock> {
    Ok(DmcBlock {
        active: base.join(s.required("active")?),
        silent: base.join(s.required("silent")?),
        outer: s.raw("outer").map(|p| base.join(p)),
        r_s1_target: s.number("r_s1_target")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<RunConfig> {
        RunConfig::from_str_in(text, Path::new("."))
    }

    #[test]
    fn powers_need_a_unit() {
        assert_eq!(parse_power("20 db").unwrap(), 100.0);
        assert_eq!(parse_power("7.5lin").unwrap(), 7.5);
        assert_eq!(parse_power(" 0 DB ").unwrap(), 1.0);
        assert!(parse_power("20").is_err());
        assert!(parse_power("-1 lin").is_err());
    }

    #[test]
    fn raw_gain_scenario() {
        let c = parse("[scenario]\np1 = 10 lin\np2 = 0 lin\n[gains]\nc11 = 1\nc12 = 0.9\nc21 = 0.05\nc22 = 0.5, 0\nctt = 10\n").unwrap();
        let sc = c.scenario().unwrap();
        assert_eq!(sc.p1, 10.0);
        assert_eq!(sc.gains.c22, Complex::new(0.5, 0.0));
    }

    #[test]
    fn both_gain_sources_rejected() {
        let e = parse("[scenario]\np1 = 10 lin\np2 = 0 lin\n[gains]\nc11=1\nc12=1\nc21=1\nc22=1\nctt=2\n[geometry]\nt2 = 0.5, 0\n")
            .unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("[geometry]"));
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse("[scenario]\np1 = 10\np2 = 0 lin\n").unwrap_err();
        assert!(e.to_string().contains("[scenario] p1"), "{e}");
        let e = parse("[optimizer]\nstarts = many\n").unwrap_err();
        assert!(e.to_string().contains("[optimizer] starts"), "{e}");
        let e = parse("[sweep]\ncolour = red\n").unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
    }

    #[test]
    fn geometry_defaults_to_reference_nodes() {
        let c = parse("[scenario]\np1 = 10 db\np2 = 20 db\n[geometry]\nt2 = 0.5, 0\n").unwrap();
        let sc = c.scenario().unwrap();
        assert!((sc.gains.c11.re - 1.0).abs() < 1e-15);
        assert!(sc.gains.ctt.re > 1.0);
    }

    #[test]
    fn inline_comments_are_dropped() {
        let c = parse("[sweep] ; grid\nstep = 0.1   ; coarse\n[dof]\nrho_points = 0.5, 0; 0.6, 0 # two points\n").unwrap();
        assert_eq!(c.sweep.unwrap().step, 0.1);
        assert_eq!(c.dof.unwrap().rho_points.unwrap().len(), 2);
    }

    #[test]
    fn lists_parse() {
        let c = parse("[sweep]\nschemes = dpc_3phase, nodpc_single\np2 = 20 db, 30 db\n[dof]\nrho_points = 0.5, 0; 0.6, -0.2\n").unwrap();
        let s = c.sweep.unwrap();
        assert_eq!(s.schemes, vec![SchemeKind::Dpc3Phase, SchemeKind::NoDpcSingle]);
        assert_eq!(s.p2.unwrap(), vec![100.0, 1000.0]);
        assert_eq!(c.dof.unwrap().rho_points.unwrap()[1], Point::new(0.6, -0.2));
    }
}
