use serde::Serialize;

use super::pmf::JointPmf;
use crate::error::{Error, Result};
use crate::scalar::{pos, Real};

/// Tolerance on conditional row sums.
pub const ROW_TOL: f64 = 1e-12;
/// Equality tolerance on the secrecy residual.
pub const SECRECY_TOL: f64 = 1e-6;

/// Row-stochastic matrix `P(out | in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stochastic<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Real> Stochastic<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::Pmf("empty conditional table".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::Pmf(format!("row {i} has {} entries, expected {width}", r.len())));
            }
            if r.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
                return Err(Error::Pmf(format!("row {i} has a negative or non-finite entry")));
            }
            let s = r.iter().fold(T::zero(), |a, &b| a + b);
            if (s - T::one()).abs() > T::tol(ROW_TOL) {
                return Err(Error::Pmf(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { rows })
    }

    /// Deterministic map `out = f(in)`.
    pub fn deterministic(n_out: usize, map: &[usize]) -> Result<Self> {
        let rows = map
            .iter()
            .map(|&o| (0..n_out).map(|j| if j == o { T::one() } else { T::zero() }).collect())
            .collect();
        Self::new(rows)
    }

    /// Every row equal to `row`.
    pub fn constant(n_in: usize, row: Vec<T>) -> Result<Self> {
        Self::new(vec![row; n_in])
    }

    pub fn n_in(&self) -> usize {
        self.rows.len()
    }

    pub fn n_out(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, i: usize, o: usize) -> T {
        self.rows[i][o]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }
}

/// Input law and channel of T2 for a phase without a secondary message.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLaw<T> {
    /// `P(x2 | v1)`.
    pub cond_x2_given_v1: Stochastic<T>,
    /// `P(y1, y2 | x1, x2)`, rows `x1 * |X2| + x2`, columns `y1 * |Y2| + y2`.
    pub channel: Stochastic<T>,
}

/// Alphabet sizes of a DMC scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DmcDims {
    pub v1: usize,
    pub v2: usize,
    pub x1: usize,
    pub x2: usize,
    pub y1: usize,
    pub y2: usize,
}

/// Coding scheme of T2 on a discrete memoryless channel.
///
/// `cond_x2_given_v1v2` rows are indexed `v1 * |V2| + v2`. Both channels map to
/// outputs indexed `y1 * |Y2| + y2`; `channel_with_t2` rows are `x1 * |X2| + x2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DmcScheme<T> {
    pub pmf_v1: Vec<T>,
    pub prefix_x1_given_v1: Stochastic<T>,
    pub cond_v2_given_v1: Stochastic<T>,
    pub cond_x2_given_v1v2: Stochastic<T>,
    pub channel_with_t2: Stochastic<T>,
    pub channel_without_t2: Stochastic<T>,
    /// `(eta1, eta2, eta3)`.
    pub phase_fractions: [T; 3],
    /// Clean relay phase law; defaults to the phase-2 input law averaged over `V2`
    /// on `channel_with_t2`.
    pub phase3: Option<PhaseLaw<T>>,
    dims: DmcDims,
}

impl<T: Real> DmcScheme<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pmf_v1: Vec<T>,
        prefix_x1_given_v1: Stochastic<T>,
        cond_v2_given_v1: Stochastic<T>,
        cond_x2_given_v1v2: Stochastic<T>,
        channel_with_t2: Stochastic<T>,
        channel_without_t2: Stochastic<T>,
        y_cards: (usize, usize),
        phase_fractions: [T; 3],
    ) -> Result<Self> {
        let dims = DmcDims {
            v1: pmf_v1.len(),
            v2: cond_v2_given_v1.n_out(),
            x1: prefix_x1_given_v1.n_out(),
            x2: cond_x2_given_v1v2.n_out(),
            y1: y_cards.0,
            y2: y_cards.1,
        };
        let s = Self {
            pmf_v1,
            prefix_x1_given_v1,
            cond_v2_given_v1,
            cond_x2_given_v1v2,
            channel_with_t2,
            channel_without_t2,
            phase_fractions,
            phase3: None,
            dims,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_phase3(mut self, law: PhaseLaw<T>) -> Result<Self> {
        self.check_phase_law(&law)?;
        self.phase3 = Some(law);
        Ok(self)
    }

    pub fn with_fractions(mut self, phase_fractions: [T; 3]) -> Result<Self> {
        self.phase_fractions = phase_fractions;
        self.validate()?;
        Ok(self)
    }

    pub fn dims(&self) -> DmcDims {
        self.dims
    }

    fn check_phase_law(&self, law: &PhaseLaw<T>) -> Result<()> {
        let d = self.dims;
        if law.cond_x2_given_v1.n_in() != d.v1 || law.cond_x2_given_v1.n_out() != d.x2 {
            return Err(Error::Pmf("phase law input table has the wrong shape".into()));
        }
        if law.channel.n_in() != d.x1 * d.x2 || law.channel.n_out() != d.y1 * d.y2 {
            return Err(Error::Pmf("phase law channel has the wrong shape".into()));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let d = self.dims;
        let mass = self.pmf_v1.iter().fold(T::zero(), |a, &b| a + b);
        if self.pmf_v1.iter().any(|p| !(*p >= T::zero())) || (mass - T::one()).abs() > T::tol(ROW_TOL) {
            return Err(Error::Pmf("pmf_v1 is not a distribution".into()));
        }
        let shape = |name: &str, t: &Stochastic<T>, n_in: usize, n_out: usize| {
            if t.n_in() == n_in && t.n_out() == n_out {
                Ok(())
            } else {
                Err(Error::Pmf(format!("{name} is {}x{}, expected {n_in}x{n_out}", t.n_in(), t.n_out())))
            }
        };
        shape("prefix_x1_given_v1", &self.prefix_x1_given_v1, d.v1, d.x1)?;
        shape("cond_v2_given_v1", &self.cond_v2_given_v1, d.v1, d.v2)?;
        shape("cond_x2_given_v1v2", &self.cond_x2_given_v1v2, d.v1 * d.v2, d.x2)?;
        shape("channel_with_t2", &self.channel_with_t2, d.x1 * d.x2, d.y1 * d.y2)?;
        shape("channel_without_t2", &self.channel_without_t2, d.x1, d.y1 * d.y2)?;
        if let Some(l) = &self.phase3 {
            self.check_phase_law(l)?;
        }
        let [e1, e2, e3] = self.phase_fractions;
        if !(e1 > T::zero() && e1 < T::one()) || !(e2 >= T::zero()) || !(e3 >= T::zero()) {
            return Err(Error::Invalid("phase fractions need 0 < eta1 < 1 and eta2, eta3 >= 0".into()));
        }
        if (e1 + e2 + e3 - T::one()).abs() > T::tol(1e-9) {
            return Err(Error::Invalid("phase fractions must sum to 1".into()));
        }
        Ok(())
    }

    /// Joint law over `V1, V2, X1, X2, Y1, Y2` while T2 transmits its message.
    pub fn joint_active(&self) -> Result<JointPmf<T>> {
        let d = self.dims;
        JointPmf::from_fn(&NAMES_ACTIVE, &[d.v1, d.v2, d.x1, d.x2, d.y1, d.y2], |i| {
            let (v1, v2, x1, x2, y1, y2) = (i[0], i[1], i[2], i[3], i[4], i[5]);
            self.pmf_v1[v1]
                * self.prefix_x1_given_v1.get(v1, x1)
                * self.cond_v2_given_v1.get(v1, v2)
                * self.cond_x2_given_v1v2.get(v1 * d.v2 + v2, x2)
                * self.channel_with_t2.get(x1 * d.x2 + x2, y1 * d.y2 + y2)
        })
    }

    /// Joint law over `V1, X1, Y1, Y2` while T2 is silent.
    pub fn joint_silent(&self) -> Result<JointPmf<T>> {
        let d = self.dims;
        JointPmf::from_fn(&NAMES_SILENT, &[d.v1, d.x1, d.y1, d.y2], |i| {
            self.pmf_v1[i[0]] * self.prefix_x1_given_v1.get(i[0], i[1]) * self.channel_without_t2.get(i[1], i[2] * d.y2 + i[3])
        })
    }

    fn default_phase3(&self) -> Result<PhaseLaw<T>> {
        let d = self.dims;
        let rows = (0..d.v1)
            .map(|v1| {
                (0..d.x2)
                    .map(|x2| {
                        (0..d.v2).fold(T::zero(), |a, v2| {
                            a + self.cond_v2_given_v1.get(v1, v2) * self.cond_x2_given_v1v2.get(v1 * d.v2 + v2, x2)
                        })
                    })
                    .collect::<Vec<T>>()
            })
            .map(|r: Vec<T>| {
                let s = r.iter().fold(T::zero(), |a, &b| a + b);
                r.into_iter().map(|p| p / s).collect()
            })
            .collect();
        Ok(PhaseLaw { cond_x2_given_v1: Stochastic::new(rows)?, channel: self.channel_with_t2.clone() })
    }

    /// Joint law over `V1, X1, X2, Y1, Y2` for a phase without a secondary message.
    pub fn joint_phase(&self, law: &PhaseLaw<T>) -> Result<JointPmf<T>> {
        self.check_phase_law(law)?;
        let d = self.dims;
        JointPmf::from_fn(&NAMES_PHASE, &[d.v1, d.x1, d.x2, d.y1, d.y2], |i| {
            self.pmf_v1[i[0]]
                * self.prefix_x1_given_v1.get(i[0], i[1])
                * law.cond_x2_given_v1.get(i[0], i[2])
                * law.channel.get(i[1] * d.x2 + i[2], i[3] * d.y2 + i[4])
        })
    }

    pub fn phase3_law(&self) -> Result<PhaseLaw<T>> {
        match &self.phase3 {
            Some(l) => Ok(l.clone()),
            None => self.default_phase3(),
        }
    }
}

pub const NAMES_ACTIVE: [&str; 6] = ["V1", "V2", "X1", "X2", "Y1", "Y2"];
pub const NAMES_SILENT: [&str; 4] = ["V1", "X1", "Y1", "Y2"];
pub const NAMES_PHASE: [&str; 5] = ["V1", "X1", "X2", "Y1", "Y2"];

/// Named constraint residuals of a DMC scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DmcResiduals<T> {
    /// Decoding slack at U1; feasible when nonnegative.
    pub reliability_slack: T,
    /// Leaked information minus the bin rate; feasible when zero.
    pub secrecy_residual: T,
}

impl<T: Real> DmcResiduals<T> {
    pub const NAMES: [&'static str; 2] = ["reliability_slack", "secrecy_residual"];
}

/// Rates and residuals of a DMC scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DmcRateReport<T> {
    pub r2: T,
    pub r_s1: T,
    pub r_s1_prime: T,
    pub residuals: DmcResiduals<T>,
}

impl<T: Real> DmcRateReport<T> {
    pub fn feasible(&self) -> bool {
        let tol = T::tol(SECRECY_TOL);
        self.residuals.reliability_slack >= -tol && self.residuals.secrecy_residual.abs() <= tol
    }
}

struct Primary<T> {
    i_y1: T,
    i_y2: T,
}

fn primary<T: Real>(silent: &JointPmf<T>) -> Result<Primary<T>> {
    Ok(Primary { i_y1: silent.mutual_information(&["V1"], &["Y1"])?, i_y2: silent.mutual_information(&["V1"], &["Y2"])? })
}

fn secondary_rate<T: Real>(active: &JointPmf<T>) -> Result<T> {
    Ok(pos(active.mutual_information(&["V2"], &["Y2"])? - active.mutual_information(&["V2"], &["V1"])?))
}

/// Single-phase rates from the active joint (`V1, V2, Y1, Y2`) and the silent
/// joint (`V1, Y1, Y2`).
pub fn theorem1_from_joints<T: Real>(active: &JointPmf<T>, silent: &JointPmf<T>) -> Result<DmcRateReport<T>> {
    let pr = primary(silent)?;
    let r_s1 = pr.i_y1 - pr.i_y2;
    let r_s1_prime = pr.i_y2;
    Ok(DmcRateReport {
        r2: secondary_rate(active)?,
        r_s1,
        r_s1_prime,
        residuals: DmcResiduals {
            reliability_slack: active.mutual_information(&["V1"], &["Y1"])? - r_s1_prime - r_s1,
            secrecy_residual: active.mutual_information(&["V1"], &["V2", "Y2"])? - r_s1_prime,
        },
    })
}

/// Single-phase scheme: T2 transmits for the whole block after it knows `V1`.
pub fn theorem1_rate<T: Real>(s: &DmcScheme<T>) -> Result<DmcRateReport<T>> {
    theorem1_from_joints(&s.joint_active()?, &s.joint_silent()?)
}

fn multi_phase<T: Real>(s: &DmcScheme<T>, eta1: T, eta2: T, later: &[(T, PhaseLaw<T>)]) -> Result<DmcRateReport<T>> {
    let silent = s.joint_silent()?;
    let active = s.joint_active()?;
    let pr = primary(&silent)?;
    let r_s1 = pr.i_y1 - pr.i_y2;
    let r_s1_prime = pr.i_y2;
    let mut heard = eta1 * pr.i_y1 + eta2 * active.mutual_information(&["V1"], &["Y1"])?;
    let mut leaked = eta1 * pr.i_y2 + eta2 * active.mutual_information(&["V1"], &["V2", "Y2"])?;
    for (eta, law) in later {
        if *eta == T::zero() {
            continue;
        }
        let j = s.joint_phase(law)?;
        heard = heard + *eta * j.mutual_information(&["V1"], &["Y1"])?;
        leaked = leaked + *eta * j.mutual_information(&["V1"], &["Y2"])?;
    }
    Ok(DmcRateReport {
        r2: eta2 * secondary_rate(&active)?,
        r_s1,
        r_s1_prime,
        residuals: DmcResiduals { reliability_slack: heard - (r_s1 + r_s1_prime), secrecy_residual: leaked - r_s1_prime },
    })
}

/// Listen, transmit with relaying, then clean relaying.
pub fn proposition1_rate<T: Real>(s: &DmcScheme<T>) -> Result<DmcRateReport<T>> {
    let [e1, e2, e3] = s.phase_fractions;
    multi_phase(s, e1, e2, &[(e3, s.phase3_law()?)])
}

/// Four-phase variant: the post-secondary time is split between a relay phase
/// (`eta3_prime`, `relay`) and a jamming phase (`eta4`, `jam`).
pub fn four_phase_rate<T: Real>(
    s: &DmcScheme<T>,
    eta3_prime: T,
    relay: &PhaseLaw<T>,
    eta4: T,
    jam: &PhaseLaw<T>,
) -> Result<DmcRateReport<T>> {
    let [e1, e2, e3] = s.phase_fractions;
    if !(eta3_prime >= T::zero()) || !(eta4 >= T::zero()) || (eta3_prime + eta4 - e3).abs() > T::tol(1e-9) {
        return Err(Error::Invalid(format!("eta3' + eta4 must equal eta3 = {e3}")));
    }
    multi_phase(s, e1, e2, &[(eta3_prime, relay.clone()), (eta4, jam.clone())])
}
