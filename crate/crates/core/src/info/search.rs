use rayon::prelude::*;

use super::dmc::{theorem1_rate, DmcRateReport, DmcScheme, Stochastic};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest alphabet the exhaustive search accepts.
pub const MAX_ALPHABET: usize = 4;
/// Finest simplex grid step accepted.
pub const MIN_STEP: f64 = 0.025;

/// The fixed part of a DMC instance over which T2's coding is searched.
#[derive(Debug, Clone, PartialEq)]
pub struct DmcFamily<T> {
    pub pmf_v1: Vec<T>,
    pub prefix_x1_given_v1: Stochastic<T>,
    pub channel_with_t2: Stochastic<T>,
    pub channel_without_t2: Stochastic<T>,
    pub x2_card: usize,
    pub y_cards: (usize, usize),
}

/// How `P(x2 | v1, v2)` is enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum X2Search {
    /// All deterministic maps `x2 = f(v1, v2)`.
    #[default]
    Deterministic,
    /// Every row on the simplex grid; only for tiny alphabets.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceConfig {
    /// Alphabet size of the auxiliary `V2`.
    pub v2_card: usize,
    /// Simplex grid step; `1/step` is rounded to an integer resolution.
    pub step: f64,
    pub x2_search: X2Search,
    /// Tractability guard on the number of candidate schemes.
    pub max_candidates: u64,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self { v2_card: 2, step: 0.05, x2_search: X2Search::Deterministic, max_candidates: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult<T> {
    /// Best feasible scheme; `None` when no candidate meets the constraints.
    pub best: Option<(DmcScheme<T>, DmcRateReport<T>)>,
    pub candidates: u64,
    pub feasible: u64,
}

/// Points `k / n` on the probability simplex of dimension `dim`, lexicographic.
pub fn simplex_grid(dim: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dim == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(dim - 1, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 {
        rec(dim, n, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

struct Space<T> {
    v1: usize,
    v2: usize,
    x2: usize,
    v2_rows: Vec<Vec<T>>,
    x2_rows: Vec<Vec<T>>,
}

impl<T: Real> Space<T> {
    fn count(&self) -> Option<u64> {
        let a = (self.v2_rows.len() as u64).checked_pow(self.v1 as u32)?;
        let b = (self.x2_rows.len() as u64).checked_pow((self.v1 * self.v2) as u32)?;
        a.checked_mul(b)
    }

    fn decode(&self, mut k: u64) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
        let nx = self.x2_rows.len() as u64;
        let nv = self.v2_rows.len() as u64;
        let mut x2 = Vec::with_capacity(self.v1 * self.v2);
        for _ in 0..self.v1 * self.v2 {
            x2.push(self.x2_rows[(k % nx) as usize].clone());
            k /= nx;
        }
        let mut v2 = Vec::with_capacity(self.v1);
        for _ in 0..self.v1 {
            v2.push(self.v2_rows[(k % nv) as usize].clone());
            k /= nv;
        }
        v2.reverse();
        x2.reverse();
        (v2, x2)
    }
}

fn build<T: Real>(f: &DmcFamily<T>, fractions: [T; 3], v2: Vec<Vec<T>>, x2: Vec<Vec<T>>) -> Result<DmcScheme<T>> {
    DmcScheme::new(
        f.pmf_v1.clone(),
        f.prefix_x1_given_v1.clone(),
        Stochastic::new(v2)?,
        Stochastic::new(x2)?,
        f.channel_with_t2.clone(),
        f.channel_without_t2.clone(),
        f.y_cards,
        fractions,
    )
}

/// Exhaustive search for the largest feasible single-phase secondary rate.
///
/// Deterministic: candidates are enumerated in a fixed order and ties keep the
/// lowest index regardless of thread scheduling.
pub fn brute_force_best_r2<T: Real>(family: &DmcFamily<T>, cfg: &BruteForceConfig) -> Result<BruteForceResult<T>> {
    let v1 = family.pmf_v1.len();
    let dims = [v1, cfg.v2_card, family.prefix_x1_given_v1.n_out(), family.x2_card, family.y_cards.0, family.y_cards.1];
    if dims.iter().any(|&d| d == 0 || d > MAX_ALPHABET) {
        return Err(Error::Usage(format!("alphabet sizes {dims:?} must lie in 1..={MAX_ALPHABET}")));
    }
    if !(cfg.step >= MIN_STEP - 1e-12) || cfg.step > 1.0 {
        return Err(Error::Usage(format!("grid step {} must lie in [{MIN_STEP}, 1]", cfg.step)));
    }
    let n = (1.0 / cfg.step).round().max(1.0) as usize;
    let to_rows = |dim: usize| -> Vec<Vec<T>> {
        simplex_grid(dim, n)
            .into_iter()
            .map(|c| c.into_iter().map(|k| T::from_usize(k).unwrap() / T::from_usize(n).unwrap()).collect())
            .collect()
    };
    let x2_rows = match cfg.x2_search {
        X2Search::Deterministic => {
            (0..family.x2_card).map(|o| (0..family.x2_card).map(|j| if j == o { T::one() } else { T::zero() }).collect()).collect()
        }
        X2Search::Grid => to_rows(family.x2_card),
    };
    let space = Space { v1, v2: cfg.v2_card, x2: family.x2_card, v2_rows: to_rows(cfg.v2_card), x2_rows };
    let total = space.count().filter(|c| *c <= cfg.max_candidates).ok_or_else(|| {
        Error::Usage(format!("search space exceeds the guard of {} candidates; coarsen the grid", cfg.max_candidates))
    })?;
    debug_assert_eq!(space.x2, family.x2_card);
    let fractions = [T::lit(0.5), T::lit(0.5), T::zero()];
    build(family, fractions, space.decode(0).0, space.decode(0).1)?;

    let scored: Vec<Option<(T, u64)>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let (v2, x2) = space.decode(k);
            let s = build(family, fractions, v2, x2).ok()?;
            let r = theorem1_rate(&s).ok()?;
            r.feasible().then_some((r.r2, k))
        })
        .collect();
    let feasible = scored.iter().filter(|s| s.is_some()).count() as u64;
    let best = scored.into_iter().flatten().fold(None::<(T, u64)>, |acc, (r, k)| match acc {
        Some((br, bk)) if br > r || (br == r && bk < k) => Some((br, bk)),
        _ => Some((r, k)),
    });
    let best = match best {
        Some((_, k)) => {
            let (v2, x2) = space.decode(k);
            let s = build(family, fractions, v2, x2)?;
            let r = theorem1_rate(&s)?;
            Some((s, r))
        }
        None => None,
    };
    Ok(BruteForceResult { best, candidates: total, feasible })
}
