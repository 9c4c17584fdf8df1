use ibl_core::condition_c::{check_condition_c, split_data, CandidateOptions, KernelDatum, Verdict};
use ibl_core::gaussian::shift::quad_gap_equality_choice;
use ibl_core::gaussian::{objective, quad_gap, GaussTuple};
use ibl_core::linalg::exact::{q, RatMatrix, Q};
use ibl_core::linalg::{inv_pd, max_abs, rank, spd_sqrt, sym_exp, symmetrize, vstack, Mat, QuadForm, Subspace, Vector};
use ibl_core::rank_one::{build_graph, cone_feasible, flow_check, subset_check, Graph, RankOneData};
use ibl_core::{classify, decompose, validate, Case, ExactData, NormalizedProblem, Problem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn int_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> RatMatrix {
    let v: Vec<i64> = (0..r * c).map(|_| rng.random_range(-2..=2)).collect();
    RatMatrix::from_i64(r, c, &v)
}

fn full_row_rank(rng: &mut ChaCha8Rng, r: usize, c: usize) -> RatMatrix {
    loop {
        let m = int_matrix(rng, r, c);
        if m.rank() == r {
            return m;
        }
    }
}

fn outer_sum(n: usize, plus: &[RatMatrix], minus: &[RatMatrix]) -> RatMatrix {
    let mut acc = vec![q(0, 1); n * n];
    for (vs, sign) in [(plus, 1), (minus, -1)] {
        for v in vs {
            for i in 0..n {
                for j in 0..n {
                    acc[i * n + j] += v.row(0)[i].clone() * v.row(0)[j].clone() * q(sign, 1);
                }
            }
        }
    }
    RatMatrix::from_rows(n, n, acc)
}

fn exact_problem(n: usize, maps: Vec<RatMatrix>, exponents: Vec<Q>, kernel: RatMatrix) -> Option<NormalizedProblem> {
    validate(&Problem::from_exact(n, ExactData { maps, exponents, kernel }).ok()?).ok()
}

/// Rational Case 1.1 datum with factors of any rank, drawn from `seed`.
fn case11(seed: u64, n_hi: usize) -> NormalizedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.random_range(1..=n_hi);
        let s_plus = rng.random_range(0..=n.min(2));
        let s_minus = rng.random_range(0..=(n - s_plus).min(2));
        let plus: Vec<RatMatrix> = (0..s_plus).map(|_| full_row_rank(&mut rng, 1, n)).collect();
        let minus: Vec<RatMatrix> = (0..s_minus).map(|_| full_row_rank(&mut rng, 1, n)).collect();
        let kernel = outer_sum(n, &plus, &minus);
        let Ok(form) = QuadForm::new(kernel.to_f64()) else { continue };
        let room = n - form.signature().plus;
        if room == 0 {
            continue;
        }
        let mut maps = Vec::new();
        let mut exps = Vec::new();
        let mut used = 0;
        while used < room && (maps.is_empty() || rng.random_bool(0.5)) {
            let d = rng.random_range(1..=room - used);
            maps.push(full_row_rank(&mut rng, d, n));
            exps.push(q(rng.random_range(5..=12), 4));
            used += d;
        }
        for _ in 0..rng.random_range(0..=2) {
            let d = rng.random_range(1..=n);
            maps.push(full_row_rank(&mut rng, d, n));
            exps.push(q(-rng.random_range(1..=6), 4));
        }
        if let Some(np) = exact_problem(n, maps, exps, kernel) {
            if classify(&np).case == Case::Case11 {
                return np;
            }
        }
    }
}

/// Rational rank-one Case 1.1 datum with transport-plan exponents,
/// perturbed half of the time.
fn rank_one(seed: u64) -> (NormalizedProblem, Graph, Vec<Q>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.random_range(1..=3);
        let source = rng.random_bool(0.5);
        let m_plus = if source { n - 1 } else { n };
        let m_neg = rng.random_range(0..=4 - m_plus.min(4));
        if m_plus + m_neg == 0 {
            continue;
        }
        let bplus = full_row_rank(&mut rng, m_plus, n);
        let mut maps: Vec<RatMatrix> =
            (0..m_plus).map(|i| RatMatrix::from_rows(1, n, bplus.row(i).to_vec())).collect();
        maps.extend((0..m_neg).map(|_| full_row_rank(&mut rng, 1, n)));
        let plus: Vec<RatMatrix> = if source { vec![full_row_rank(&mut rng, 1, n)] } else { vec![] };
        let minus: Vec<RatMatrix> = if rng.random_bool(0.5) { vec![full_row_rank(&mut rng, 1, n)] } else { vec![] };
        let kernel = outer_sum(n, &plus, &minus);
        let m = maps.len();
        let placeholder = (0..m).map(|k| if k < m_plus { q(2, 1) } else { q(-1, 1) }).collect();
        let Some(np) = exact_problem(n, maps.clone(), placeholder, kernel.clone()) else { continue };
        if classify(&np).case != Case::Case11 {
            continue;
        }
        let Ok(g) = RankOneData::from_exact(&np).and_then(|d| build_graph(&d)) else { continue };
        let mut c: Vec<Q> = (0..m).map(|k| if k < m_plus { q(1, 1) } else { q(0, 1) }).collect();
        for &(i, j) in &g.edges {
            if rng.random_bool(0.6) {
                let f = q(rng.random_range(1..=8), 4);
                if (1..=m_plus).contains(&i) {
                    c[i - 1] += f.clone();
                }
                if (m_plus + 1..=m).contains(&j) {
                    c[j - 1] -= f;
                }
            }
        }
        if rng.random_bool(0.5) {
            let k = rng.random_range(0..m);
            c[k] += q(rng.random_range(-4..=4), 4);
        }
        for (k, x) in c.iter_mut().enumerate() {
            if k < m_plus && *x <= q(0, 1) {
                *x = q(1, 2);
            }
            if k >= m_plus && *x >= q(0, 1) {
                *x = q(-1, 4);
            }
        }
        if let Some(np) = exact_problem(n, maps, c.clone(), kernel) {
            return (np, g, c);
        }
    }
}

fn holds(np: &NormalizedProblem) -> bool {
    let d = decompose(np, &classify(np)).unwrap();
    check_condition_c(np, &d, &CandidateOptions::default()).unwrap().verdict == Verdict::HoldsOnCandidates
}

fn spd(seed: u64, d: usize) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(d, d + 1, |_, _| rng.random_range(-1.0..1.0));
    &g * g.transpose() + Mat::identity(d, d) * 0.1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validate_is_idempotent(seed in any::<u64>()) {
        let np = case11(seed, 4);
        let again = validate(np.problem()).unwrap();
        prop_assert_eq!(again, np);
    }

    #[test]
    fn decomposition_reconstructs_kernel(seed in any::<u64>()) {
        let np = case11(seed, 4);
        let cls = classify(&np);
        let d = decompose(&np, &cls).unwrap();
        let qm = np.kernel().matrix();
        prop_assert!(max_abs(&(d.reconstruct() - qm)) <= 1e-8 * (1.0 + max_abs(qm)));
        prop_assert_eq!(d.b0.nrows(), cls.signature.plus);
        prop_assert_eq!(d.b_last.nrows(), cls.signature.minus);
    }

    #[test]
    fn signature_is_congruence_invariant(
        entries in proptest::collection::vec(-3i64..=3, 9),
        p in proptest::collection::vec(-3i64..=3, 9),
    ) {
        let qm = Mat::from_fn(3, 3, |i, j| (entries[3 * i + j] + entries[3 * j + i]) as f64);
        let pm = Mat::from_fn(3, 3, |i, j| p[3 * i + j] as f64);
        prop_assume!(pm.determinant().abs() >= 1.0);
        let a = QuadForm::new(qm.clone()).unwrap().signature();
        let b = QuadForm::new(symmetrize(&(pm.transpose() * &qm * &pm))).unwrap().signature();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn quad_gap_is_nonnegative_and_tight(seed in any::<u64>(), w in proptest::collection::vec(-2.0f64..2.0, 2)) {
        let maps = vec![
            Mat::from_row_slice(1, 2, &[1.0, 0.0]),
            Mat::from_row_slice(1, 2, &[0.0, 1.0]),
            Mat::from_row_slice(1, 2, &[1.0, 1.0]),
        ];
        let weights = [1.5, 1.0, -0.5];
        let mats: Vec<Mat> = (0..3).map(|k| spd(seed.wrapping_add(k), 1)).collect();
        let a = maps.iter().zip(&weights).zip(&mats).fold(Mat::zeros(2, 2), |s, ((b, c), ak)| s + b.transpose() * ak * b * *c);
        prop_assume!(inv_pd(&a).is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys: Vec<Vector> = (0..3).map(|_| Vector::from_fn(1, |_, _| rng.random_range(-2.0..2.0))).collect();
        prop_assert!(quad_gap(&maps, &weights, &mats, &ys).unwrap() >= -1e-10);
        let eq = quad_gap_equality_choice(&maps, &weights, &mats, &Vector::from_vec(w)).unwrap();
        prop_assert!(quad_gap(&maps, &weights, &mats, &eq).unwrap().abs() <= 1e-8);
    }

    #[test]
    fn phi_is_midpoint_concave_on_exponential_curves(seed in any::<u64>(), dir_seed in any::<u64>()) {
        let np = case11(seed, 3);
        let mut s = 1.0;
        let base = loop {
            let mats: Vec<Mat> = np.factors().iter().enumerate()
                .map(|(k, f)| spd(seed ^ k as u64, f.target_dim()) * if f.exponent > 0.0 { s } else { 1.0 / s })
                .collect();
            let t = GaussTuple { mats };
            if objective(&np, &t).unwrap().is_some() {
                break t;
            }
            s *= 2.0;
            prop_assume!(s < 1e6);
        };
        let mut dirs: Vec<Mat> = base.mats.iter().enumerate().map(|(k, a)| {
            let g = spd(dir_seed ^ k as u64, a.nrows());
            g - Mat::identity(a.nrows(), a.nrows())
        }).collect();
        let at = |dirs: &[Mat], s: f64| {
            let mats = base.mats.iter().zip(dirs).map(|(a, y)| {
                let h = spd_sqrt(a);
                symmetrize(&(&h * sym_exp(&(y * s)) * &h))
            }).collect();
            objective(&np, &GaussTuple { mats }).unwrap()
        };
        let mut vals = None;
        for _ in 0..30 {
            if let (Some(l), Some(m), Some(r)) = (at(&dirs, -1.0), at(&dirs, 0.0), at(&dirs, 1.0)) {
                vals = Some((l, m, r));
                break;
            }
            dirs.iter_mut().for_each(|y| *y /= 2.0);
        }
        let (l, m, r) = vals.unwrap();
        prop_assert!(m >= 0.5 * (l + r) - 1e-9 * (1.0 + m.abs()));
    }

    #[test]
    fn three_membership_routes_agree(seed in any::<u64>()) {
        let (_, g, c) = rank_one(seed);
        let subset = subset_check(&c, &g).unwrap().is_none();
        let (violation, plan) = flow_check(&c, &g).unwrap();
        prop_assert_eq!(subset, violation.is_none());
        prop_assert_eq!(subset, plan.is_some());
        prop_assert_eq!(subset, cone_feasible(&c, &g).unwrap().is_some());
    }

    #[test]
    fn condition_c_matches_rank_one_membership(seed in any::<u64>()) {
        let (np, g, c) = rank_one(seed);
        let member = subset_check(&c, &g).unwrap().is_none();
        prop_assert_eq!(member, holds(&np));
    }

    #[test]
    fn critical_splits_inherit_condition_c(seed in any::<u64>()) {
        let (np, _, _) = rank_one(seed);
        let d = decompose(&np, &classify(&np)).unwrap();
        let report = check_condition_c(&np, &d, &CandidateOptions::default()).unwrap();
        prop_assume!(report.verdict == Verdict::HoldsOnCandidates);
        let c = np.problem().exponents();
        for (basis, _) in &report.criticals {
            let v = Subspace::span(basis);
            let split = split_data(&np, &d, &v);
            for maps in [&split.sub_maps, &split.quot_maps] {
                if maps[0].ncols() == 0 {
                    continue;
                }
                let datum = KernelDatum::from_maps(maps, &c, np.m_plus()).unwrap();
                let r = datum.check(&[], &CandidateOptions::default());
                prop_assert_eq!(r.verdict, Verdict::HoldsOnCandidates);
            }
        }
    }

    #[test]
    fn split_dimensions_are_complementary(seed in any::<u64>(), dim_seed in any::<u64>()) {
        let np = case11(seed, 4);
        let d = decompose(&np, &classify(&np)).unwrap();
        let n = np.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(dim_seed);
        let k = rng.random_range(0..=n);
        let v = Subspace::span(&Mat::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0)));
        let split = split_data(&np, &d, &v);
        prop_assert_eq!(split.dim_v, v.dim());
        let mut maps = vec![d.b0.clone()];
        maps.extend(np.factors().iter().map(|f| f.map.clone()));
        maps.push(d.b_last.clone());
        for ((m, s), t) in maps.iter().zip(split.sub_dims()).zip(split.quot_dims()) {
            prop_assert_eq!(s + t, rank(m));
            prop_assert_eq!(s, v.image_dim(m));
        }
        let bplus: Vec<&Mat> = np.factors()[..np.m_plus()].iter().map(|f| &f.map).collect();
        prop_assert_eq!(rank(&vstack(&bplus, n)), np.factors()[..np.m_plus()].iter().map(|f| f.target_dim()).sum::<usize>());
    }
}
