use cogsec::info::{
    brute_force_best_r2, proposition1_rate, BruteForceConfig, DmcFamily, DmcScheme, JointPmf, Stochastic,
};
use proptest::prelude::*;

/// Normalized pmf from positive weights.
fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn law(cards: [usize; 3], w: &[f64]) -> JointPmf<f64> {
    let n: usize = cards.iter().product();
    JointPmf::new(vec!["A".into(), "B".into(), "C".into()], cards.to_vec(), normalize(&w[..n])).unwrap()
}

fn cards() -> impl Strategy<Value = [usize; 3]> {
    [2usize..=3, 2usize..=3, 2usize..=3]
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-4f64..1.0, 27)
}

fn rows(w: &[f64], n_in: usize, n_out: usize) -> Vec<Vec<f64>> {
    (0..n_in).map(|i| normalize(&w[i * n_out..(i + 1) * n_out])).collect()
}

/// Direct `sum p log(p / (pa pb))` over a dense `(a, b, c)` tensor, with `C` marginalized.
fn mi_ab(p: &JointPmf<f64>) -> f64 {
    let c = p.cards();
    let (na, nb, nc) = (c[0], c[1], c[2]);
    let mut pab = vec![0.0; na * nb];
    for a in 0..na {
        for b in 0..nb {
            for cc in 0..nc {
                pab[a * nb + b] += p.prob(&[a, b, cc]);
            }
        }
    }
    let pa: Vec<f64> = (0..na).map(|a| (0..nb).map(|b| pab[a * nb + b]).sum()).collect();
    let pb: Vec<f64> = (0..nb).map(|b| (0..na).map(|a| pab[a * nb + b]).sum()).collect();
    let mut s = 0.0;
    for a in 0..na {
        for b in 0..nb {
            let v = pab[a * nb + b];
            if v > 0.0 {
                s += v * (v / (pa[a] * pb[b])).log2();
            }
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn chain_rule(c in cards(), w in weights()) {
        let p = law(c, &w);
        let lhs = p.mutual_information(&["A"], &["B", "C"]).unwrap();
        let rhs = p.mutual_information(&["A"], &["B"]).unwrap()
            + p.conditional_mutual_information(&["A"], &["C"], &["B"]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn data_processing(c in cards(), px in prop::collection::vec(1e-4f64..1.0, 3), k1 in weights(), k2 in weights()) {
        let [nx, ny, nz] = c;
        let px = normalize(&px[..nx]);
        let (k1, k2) = (rows(&k1, nx, ny), rows(&k2, ny, nz));
        let m = JointPmf::from_fn(&["X", "Y", "Z"], &[nx, ny, nz], |i| px[i[0]] * k1[i[0]][i[1]] * k2[i[1]][i[2]]).unwrap();
        let xz = m.mutual_information(&["X"], &["Z"]).unwrap();
        let xy = m.mutual_information(&["X"], &["Y"]).unwrap();
        prop_assert!(xz <= xy + 1e-10, "I(X;Z) = {xz} > I(X;Y) = {xy}");
        prop_assert!(m.conditional_mutual_information(&["X"], &["Z"], &["Y"]).unwrap().abs() <= 1e-10);
    }
}

proptest! {
    #[test]
    fn mutual_information_is_bounded(c in cards(), w in weights()) {
        let p = law(c, &w);
        let i = p.mutual_information(&["A"], &["B"]).unwrap();
        let h = p.entropy(&["A"]).unwrap().min(p.entropy(&["B"]).unwrap());
        prop_assert!(i >= -1e-12 && i <= h + 1e-12, "I = {i}, min H = {h}");
        prop_assert!((i - mi_ab(&p)).abs() <= 1e-10);
        prop_assert!(p.mutual_information(&["A"], &["B", "C"]).unwrap() >= -1e-12);
    }

    #[test]
    fn conditioning_on_nothing_is_plain_information(c in cards(), w in weights()) {
        let p = law(c, &w);
        let empty: [&str; 0] = [];
        let a = p.conditional_mutual_information(&["A"], &["B"], &empty).unwrap();
        prop_assert!((a - p.mutual_information(&["A"], &["B"]).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn secondary_rate_vanishes_as_listening_fills_the_block(w in prop::collection::vec(1e-3f64..1.0, 64)) {
        let st = |m: Vec<Vec<f64>>| Stochastic::new(m).unwrap();
        let base = DmcScheme::new(
            normalize(&w[0..2]),
            st(rows(&w[2..6], 2, 2)),
            st(rows(&w[6..10], 2, 2)),
            st(rows(&w[10..18], 4, 2)),
            st(rows(&w[18..34], 4, 4)),
            st(rows(&w[34..42], 2, 4)),
            (2, 2),
            [0.5, 0.3, 0.2],
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for eta1 in [0.9, 0.99, 0.999, 0.999_999] {
            let rest = 1.0 - eta1;
            let s = base.clone().with_fractions([eta1, 0.6 * rest, 0.4 * rest]).unwrap();
            let r2 = proposition1_rate(&s).unwrap().r2;
            prop_assert!(r2 <= prev + 1e-15);
            prev = r2;
        }
        prop_assert!(prev <= 1e-5, "r2 = {prev} with eta1 -> 1");
    }
}

fn bsc(e: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - e, e], vec![e, 1.0 - e]]
}

/// Binary family: U1 sees X1 through BSC(0.05); U2 sees X1 xor X2 through BSC(0.15).
fn binary_family() -> DmcFamily<f64> {
    let with = (0..4)
        .map(|r| {
            let (x1, x2) = (r / 2, r % 2);
            (0..4).map(|c| bsc(0.05)[x1][c / 2] * bsc(0.15)[x1 ^ x2][c % 2]).collect()
        })
        .collect();
    let without = (0..2).map(|x1| (0..4).map(|c| bsc(0.05)[x1][c / 2] * bsc(0.15)[x1][c % 2]).collect()).collect();
    DmcFamily {
        pmf_v1: vec![0.7, 0.3],
        prefix_x1_given_v1: Stochastic::deterministic(2, &[0, 1]).unwrap(),
        channel_with_t2: Stochastic::new(with).unwrap(),
        channel_without_t2: Stochastic::new(without).unwrap(),
        x2_card: 2,
        y_cards: (2, 2),
    }
}

#[test]
fn brute_force_refinement_is_monotone() {
    let f = binary_family();
    let coarse = brute_force_best_r2(&f, &BruteForceConfig { step: 0.05, ..Default::default() }).unwrap();
    let fine = brute_force_best_r2(&f, &BruteForceConfig { step: 0.025, ..Default::default() }).unwrap();
    let best = |r: &cogsec::info::BruteForceResult<f64>| r.best.as_ref().map_or(0.0, |b| b.1.r2);
    assert!(fine.candidates > coarse.candidates);
    assert!(best(&fine) >= best(&coarse) - 1e-12, "{} < {}", best(&fine), best(&coarse));
    assert!(coarse.feasible >= 1, "the silent coding is always feasible");
}

#[test]
fn csv_round_trip_preserves_information() {
    let p = law([2, 3, 2], &(1..=12).map(f64::from).collect::<Vec<_>>());
    let mut buf = Vec::new();
    p.to_csv_writer(&mut buf).unwrap();
    let q = JointPmf::<f64>::from_csv_reader(buf.as_slice()).unwrap();
    let a = p.mutual_information(&["A"], &["B", "C"]).unwrap();
    let b = q.mutual_information(&["A"], &["B", "C"]).unwrap();
    assert!((a - b).abs() <= 1e-12);
}
