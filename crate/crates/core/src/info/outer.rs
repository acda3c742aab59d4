use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::pmf::JointPmf;
use crate::error::{Error, Result};
use crate::scalar::{pos, Real};

/// Tolerance on the conditional mutual information certifying a Markov chain.
pub const MARKOV_TOL: f64 = 1e-9;
/// Tolerance on the residual of the degradedness factorization.
pub const DEGRADED_TOL: f64 = 1e-6;

/// Outer bound evaluated at one joint law over `U, V, X1, X2, Y1, Y2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DmcOuterBound<T> {
    pub r_s1_ub: T,
    pub r2_ub: T,
    pub i_x1_y1_given_v: T,
    pub i_x1_y2_given_v: T,
    pub i_u_y1: T,
    pub i_v_y2: T,
    /// Largest absolute residual of `P(y2|x1) = sum P(y1|x1) Q(y2|y1)`.
    pub degradation_residual: T,
}

/// Lawson-Hanson nonnegative least squares: `min |Ax - b|` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let solve = |passive: &[bool]| -> DVector<f64> {
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let mut z = DVector::zeros(n);
        if cols.is_empty() {
            return z;
        }
        let sub = DMatrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])]);
        let s = sub.svd(true, true).solve(b, 1e-14).expect("svd with both factors");
        for (k, &j) in cols.iter().enumerate() {
            z[j] = s[k];
        }
        z
    };
    for _ in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let pick = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = pick else { break };
        passive[j] = true;
        for _ in 0..(3 * n + 10) {
            let z = solve(&passive);
            if (0..n).filter(|&k| passive[k]).all(|k| z[k] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for k in (0..n).filter(|&k| passive[k] && z[k] <= 0.0) {
                alpha = alpha.min(x[k] / (x[k] - z[k]));
            }
            x += (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k] <= 1e-15 {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    x
}

/// Residual of the best stochastic `Q` with `P(y2|x1) = sum_y1 P(y1|x1) Q(y2|y1)`,
/// over inputs `x1` of positive probability.
pub fn degradation_residual<T: Real>(p: &JointPmf<T>) -> Result<f64> {
    let px1 = p.marginal(&["X1"])?;
    let w1 = p.conditional(&["Y1"], &["X1"])?;
    let w2 = p.conditional(&["Y2"], &["X1"])?;
    let (ny1, ny2) = (w1.n_out(), w2.n_out());
    let live: Vec<usize> = (0..w1.n_in()).filter(|&x| px1.probs()[x] > T::zero()).collect();
    let weight = 1e3;
    let rows = live.len() * ny2 + ny1;
    let mut a = DMatrix::zeros(rows, ny1 * ny2);
    let mut b = DVector::zeros(rows);
    for (r, &x) in live.iter().enumerate() {
        for y2 in 0..ny2 {
            for y1 in 0..ny1 {
                a[(r * ny2 + y2, y1 * ny2 + y2)] = w1.get(x, y1).as_f64();
            }
            b[r * ny2 + y2] = w2.get(x, y2).as_f64();
        }
    }
    for y1 in 0..ny1 {
        let r = live.len() * ny2 + y1;
        for y2 in 0..ny2 {
            a[(r, y1 * ny2 + y2)] = weight;
        }
        b[r] = weight;
    }
    let q = nnls(&a, &b);
    let res = &a * &q - &b;
    let mut worst: f64 = 0.0;
    for r in 0..rows {
        let scale = if r >= live.len() * ny2 { weight } else { 1.0 };
        worst = worst.max((res[r] / scale).abs());
    }
    Ok(worst)
}

/// Capacity-equivocation outer bound at the joint law `p`.
///
/// Requires `(U, V) -> (X1, X2) -> (Y1, Y2)` and `Y2` stochastically degraded
/// with respect to `Y1` given `X1`.
pub fn dmc_outer_bound<T: Real>(p: &JointPmf<T>, r_s1_target: T) -> Result<DmcOuterBound<T>> {
    for v in ["U", "V", "X1", "X2", "Y1", "Y2"] {
        p.position(v)?;
    }
    let markov = p.conditional_mutual_information(&["U", "V"], &["Y1", "Y2"], &["X1", "X2"])?;
    if markov.as_f64() > MARKOV_TOL {
        return Err(Error::Precondition(format!("(U,V) -> (X1,X2) -> (Y1,Y2) fails: I(U,V;Y1,Y2|X1,X2) = {markov}")));
    }
    let residual = degradation_residual(p)?;
    if residual > DEGRADED_TOL {
        return Err(Error::Precondition(format!(
            "X1 -> Y1 -> Y2 degradedness fails: P(y2|x1) does not factor through P(y1|x1) (residual {residual:.3e})"
        )));
    }
    let i_x1_y1_given_v = p.conditional_mutual_information(&["X1"], &["Y1"], &["V"])?;
    let i_x1_y2_given_v = p.conditional_mutual_information(&["X1"], &["Y2"], &["V"])?;
    let i_u_y1 = p.mutual_information(&["U"], &["Y1"])?;
    let i_v_y2 = p.mutual_information(&["V"], &["Y2"])?;
    Ok(DmcOuterBound {
        r_s1_ub: pos((i_x1_y1_given_v - i_x1_y2_given_v).min(i_u_y1)),
        r2_ub: pos(i_v_y2 - pos(r_s1_target - i_x1_y1_given_v)),
        i_x1_y1_given_v,
        i_x1_y2_given_v,
        i_u_y1,
        i_v_y2,
        degradation_residual: T::lit(residual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip(e: f64, a: usize, b: usize) -> f64 {
        if a == b {
            1.0 - e
        } else {
            e
        }
    }

    /// U = X1 uniform, V = X2 uniform, Y1 = X1 xor N(e1), Y2 = (Y1 xor N(e2), X2).
    fn chain(e1: f64, e2: f64) -> JointPmf<f64> {
        JointPmf::from_fn(&["U", "V", "X1", "X2", "Y1", "Y2"], &[2, 2, 2, 2, 2, 4], |i| {
            let (u, v, x1, x2, y1, y2) = (i[0], i[1], i[2], i[3], i[4], i[5]);
            if u != x1 || v != x2 || y2 / 2 != x2 {
                return 0.0;
            }
            0.25 * flip(e1, x1, y1) * flip(e2, y1, y2 % 2)
        })
        .unwrap()
    }

    #[test]
    fn nnls_recovers_nonnegative_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![0.3, 0.7, 1.0]);
        let x = nnls(&a, &b);
        assert!((x[0] - 0.3).abs() < 1e-12 && (x[1] - 0.7).abs() < 1e-12);
        let b = DVector::from_vec(vec![-1.0, 0.5, 0.5]);
        let x = nnls(&a, &b);
        assert!(x.iter().all(|v| *v >= 0.0));
        assert!(x[0].abs() < 1e-12);
    }

    #[test]
    fn degraded_chain_passes_and_values_are_consistent() {
        let p = chain(0.1, 0.2);
        let ob = dmc_outer_bound(&p, 0.0).unwrap();
        assert!(ob.degradation_residual < 1e-9);
        assert!(ob.r_s1_ub > 0.0);
        assert!((ob.r2_ub - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_outputs_give_zero_secrecy_bound() {
        let p = JointPmf::from_fn(&["U", "V", "X1", "X2", "Y1", "Y2"], &[2, 1, 2, 1, 2, 2], |i| {
            if i[0] == i[2] && i[4] == i[5] {
                0.5 * flip(0.1, i[2], i[4])
            } else {
                0.0
            }
        })
        .unwrap();
        let ob = dmc_outer_bound(&p, 0.3).unwrap();
        assert_eq!(ob.r_s1_ub, 0.0);
    }

    #[test]
    fn zero_target_leaves_secondary_term() {
        let p = chain(0.05, 0.3);
        let ob = dmc_outer_bound(&p, 0.0).unwrap();
        assert_eq!(ob.r2_ub, ob.i_v_y2);
        let strict = dmc_outer_bound(&p, 5.0).unwrap();
        assert!(strict.r2_ub < ob.r2_ub);
    }

    #[test]
    fn violations_are_reported() {
        // Y2 cleaner than Y1: not degraded
        let p = JointPmf::from_fn(&["U", "V", "X1", "X2", "Y1", "Y2"], &[2, 1, 2, 1, 2, 2], |i| {
            if i[0] == i[2] {
                0.5 * flip(0.3, i[2], i[4]) * flip(0.0, i[2], i[5])
            } else {
                0.0
            }
        })
        .unwrap();
        let e = dmc_outer_bound(&p, 0.1).unwrap_err();
        assert!(matches!(e, Error::Precondition(ref m) if m.contains("degradedness")));
        // U leaks to Y1 outside X1
        let q = JointPmf::from_fn(&["U", "V", "X1", "X2", "Y1", "Y2"], &[2, 1, 1, 1, 2, 2], |i| {
            if i[0] == i[4] && i[4] == i[5] {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        let e = dmc_outer_bound(&q, 0.1).unwrap_err();
        assert!(matches!(e, Error::Precondition(ref m) if m.contains("(U,V)")));
    }
}
