use serde::Serialize;

use crate::awgn::{four_phase_r1_terms, FourPhaseSplit, Scenario};
use crate::error::{Error, Result};

/// Fixed stage of the comparison: the listening and secondary fractions and the
/// largest per-phase power T2 may use after the secondary phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourPhaseStage {
    pub eta1: f64,
    pub eta2: f64,
    pub p2_3_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourPhaseComparison {
    pub r1_3ph: f64,
    pub r1_4ph: f64,
    pub split_3ph: FourPhaseSplit<f64>,
    pub split_4ph: FourPhaseSplit<f64>,
}

const GRID_2D: usize = 101;
const GRID_3D: usize = 41;
const REFINE_TOP: usize = 5;
const MIN_STEP: f64 = 1e-9;

fn compass<const N: usize>(f: &impl Fn(&[f64; N]) -> f64, mut x: [f64; N], mut fx: f64, step0: f64) -> ([f64; N], f64) {
    let mut step = step0;
    while step >= MIN_STEP {
        let mut moved = false;
        for i in 0..N {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] = (x[i] + dir * step).clamp(0.0, 1.0);
                if y[i] == x[i] {
                    continue;
                }
                let fy = f(&y);
                if fy > fx + 1e-15 {
                    x = y;
                    fx = fy;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (x, fx)
}

fn maximize<const N: usize>(f: impl Fn(&[f64; N]) -> f64, n: usize) -> ([f64; N], f64) {
    let total = n.pow(N as u32);
    let mut pts: Vec<([f64; N], f64)> = (0..total)
        .map(|mut k| {
            let mut x = [0.0; N];
            for v in x.iter_mut().rev() {
                *v = (k % n) as f64 / (n - 1) as f64;
                k /= n;
            }
            (x, f(&x))
        })
        .collect();
    pts.sort_by(|a, b| b.1.total_cmp(&a.1));
    pts.truncate(REFINE_TOP);
    let step = 1.0 / (n - 1) as f64;
    pts.into_iter()
        .map(|(x, fx)| compass(&f, x, fx, step))
        .fold(([0.0; N], f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc })
}

/// Largest post-secondary primary secrecy of the three-phase scheme (jamming
/// share `rho3` at power up to `p2_3_max`) and of the four-phase scheme (split
/// into pure relaying and pure jamming sub-phases with the same time and energy).
pub fn solve_four_phase_comparison(sc: &Scenario<f64>, stage: &FourPhaseStage) -> Result<FourPhaseComparison> {
    let eta3 = 1.0 - stage.eta1 - stage.eta2;
    if !(stage.eta1 > 0.0 && stage.eta2 >= 0.0 && eta3 >= -1e-12) || !(stage.p2_3_max >= 0.0 && stage.p2_3_max.is_finite()) {
        return Err(Error::Usage(format!("invalid stage {stage:?}")));
    }
    let eta3 = eta3.max(0.0);
    let pmax = stage.p2_3_max;

    let three = |x: &[f64; 2]| -> FourPhaseSplit<f64> {
        let p = x[1] * pmax;
        FourPhaseSplit { eta3, eta3_prime: eta3, eta4: 0.0, p2_3prime: p, p2_4: 0.0, rho3: x[0], p2_3: p }
    };
    let four = |x: &[f64; 3]| -> FourPhaseSplit<f64> {
        let p = x[0] * pmax;
        let energy = eta3 * p;
        let (e3p, e4) = (x[1] * eta3, eta3 - x[1] * eta3);
        let q = if e4 <= 0.0 {
            1.0
        } else if e3p <= 0.0 {
            0.0
        } else {
            x[2]
        };
        FourPhaseSplit {
            eta3,
            eta3_prime: e3p,
            eta4: e4,
            p2_3prime: if e3p > 0.0 { q * energy / e3p } else { 0.0 },
            p2_4: if e4 > 0.0 { (1.0 - q) * energy / e4 } else { 0.0 },
            rho3: 0.0,
            p2_3: p,
        }
    };
    let eval = |s: &FourPhaseSplit<f64>| four_phase_r1_terms(sc, s);
    let (x3, r3) = maximize(|x: &[f64; 2]| eval(&three(x)).map_or(f64::NEG_INFINITY, |v| v.1), GRID_2D);
    let (x4, r4) = maximize(|x: &[f64; 3]| eval(&four(x)).map_or(f64::NEG_INFINITY, |v| v.0), GRID_3D);
    if !r3.is_finite() || !r4.is_finite() {
        return Err(Error::Invalid("four-phase comparison produced no valid split".into()));
    }
    Ok(FourPhaseComparison { r1_3ph: r3, r1_4ph: r4, split_3ph: three(&x3), split_4ph: four(&x4) })
}
