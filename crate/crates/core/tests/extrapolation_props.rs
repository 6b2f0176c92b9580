use picard_mg::extrapolation::{
    anderson_solve, extrapolate, generalized_residual, mpe_extrapolate, picard_solve, restarted_solve,
    rre_extrapolate, solve_fixed_point, Accelerator, AndersonState, Extrapolation, FnMap, IterateWindow,
    SolveStatus, StopCriteria,
};
use picard_mg::linalg::{least_squares, lu_solve, norm2, DenseMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn contraction(d: usize, rng: &mut ChaCha8Rng) -> (DenseMatrix, Vec<f64>) {
    let mut m = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m.set(i, j, rng.gen_range(-1.0..1.0) * 0.9 / d as f64);
        }
    }
    (m, (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn affine_step(m: &DenseMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    m.matvec(x).iter().zip(b).map(|(u, v)| u + v).collect()
}

fn trajectory(m: &DenseMatrix, b: &[f64], x0: Vec<f64>, count: usize) -> Vec<Vec<f64>> {
    let mut it = vec![x0];
    while it.len() < count {
        let y = affine_step(m, b, it.last().unwrap());
        it.push(y);
    }
    it
}

fn random_iterates(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn differences(it: &[Vec<f64>]) -> DenseMatrix {
    let cols: Vec<Vec<f64>> = it.windows(2).map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect()).collect();
    DenseMatrix::from_columns(&cols).unwrap()
}

fn combination(it: &[Vec<f64>], gamma: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; it[0].len()];
    for (g, s) in gamma.iter().zip(it) {
        for (ti, si) in t.iter_mut().zip(s) {
            *ti += g * si;
        }
    }
    t
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_maps_are_solved_exactly(seed in 0u64..10_000, d in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, b) = contraction(d, &mut rng);
        let mut a = DenseMatrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                a.add(i, j, -m.get(i, j));
            }
        }
        let exact = lu_solve(&a, &b).unwrap();
        let x0 = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = IterateWindow::new(&trajectory(&m, &b, x0, d + 2)).unwrap();
        for method in [Extrapolation::Mpe, Extrapolation::Rre] {
            let t = extrapolate(&w, method).unwrap().t;
            prop_assert!(close(&t, &exact, 1e-7), "{method:?} {t:?} {exact:?}");
        }
    }

    #[test]
    fn weights_sum_to_one_and_reproduce_t(seed in 0u64..10_000, q in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let it = random_iterates(12, q + 2, &mut rng);
        let w = IterateWindow::new(&it).unwrap();
        for method in [Extrapolation::Mpe, Extrapolation::Rre] {
            let r = extrapolate(&w, method).unwrap();
            prop_assert_eq!(r.gamma.len(), q + 1);
            prop_assert!((r.gamma.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(close(&r.t, &combination(&it[..=q], &r.gamma), 1e-9));
        }
    }

    #[test]
    fn translation_equivariance(seed in 0u64..10_000, q in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let it = random_iterates(9, q + 2, &mut rng);
        let shift: Vec<f64> = (0..9).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let moved: Vec<Vec<f64>> = it.iter().map(|s| s.iter().zip(&shift).map(|(a, b)| a + b).collect()).collect();
        for method in [Extrapolation::Mpe, Extrapolation::Rre] {
            let a = extrapolate(&IterateWindow::new(&it).unwrap(), method).unwrap();
            let b = extrapolate(&IterateWindow::new(&moved).unwrap(), method).unwrap();
            let shifted: Vec<f64> = a.t.iter().zip(&shift).map(|(x, s)| x + s).collect();
            prop_assert!(close(&b.t, &shifted, 1e-8));
            prop_assert!(close(&b.gamma, &a.gamma, 1e-8));
        }
    }

    #[test]
    fn rre_matches_constrained_least_squares(seed in 0u64..10_000, q in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let it = random_iterates(15, q + 2, &mut rng);
        let ds = differences(&it);
        let g = ds.transpose().matmul(&ds);
        let mut kkt = DenseMatrix::zeros(q + 2, q + 2);
        for i in 0..=q {
            for j in 0..=q {
                kkt.set(i, j, g.get(i, j));
            }
            kkt.set(i, q + 1, 1.0);
            kkt.set(q + 1, i, 1.0);
        }
        let mut rhs = vec![0.0; q + 2];
        rhs[q + 1] = 1.0;
        let oracle = lu_solve(&kkt, &rhs).unwrap();
        let r = rre_extrapolate(&IterateWindow::new(&it).unwrap()).unwrap();
        prop_assert!(close(&r.gamma, &oracle[..=q], 1e-7));
        let res = norm2(&ds.matvec(&r.gamma));
        prop_assert!((r.generalized_residual_norm - res).abs() <= 1e-8 * (1.0 + res));
        prop_assert!((r.lambda_shortcut.unwrap() - res * res).abs() <= 1e-8 * (1.0 + res * res));
    }

    #[test]
    fn mpe_matches_its_definition(seed in 0u64..10_000, q in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let it = random_iterates(15, q + 2, &mut rng);
        let ds = differences(&it);
        let lead = ds.block(ds.rows(), q);
        let last: Vec<f64> = ds.column(q).iter().map(|v| -v).collect();
        let mut c = least_squares(&lead, &last).unwrap();
        c.push(1.0);
        let sum: f64 = c.iter().sum();
        let oracle: Vec<f64> = c.iter().map(|v| v / sum).collect();
        let r = mpe_extrapolate(&IterateWindow::new(&it).unwrap()).unwrap();
        prop_assert!(close(&r.gamma, &oracle, 1e-7));
    }

    #[test]
    fn generalized_residual_is_the_weighted_difference(seed in 0u64..10_000, q in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let it = random_iterates(20, q + 2, &mut rng);
        let w = IterateWindow::new(&it).unwrap();
        let ds = differences(&it);
        for method in [Extrapolation::Mpe, Extrapolation::Rre] {
            let r = extrapolate(&w, method).unwrap();
            let direct = generalized_residual(&w, method).unwrap();
            prop_assert!(close(&direct, &ds.matvec(&r.gamma), 1e-7));
            prop_assert!((norm2(&direct) - r.generalized_residual_norm).abs() < 1e-7 * (1.0 + norm2(&direct)));
        }
    }

    #[test]
    fn anderson_depth_zero_is_picard(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, b) = contraction(5, &mut rng);
        let mut st = AndersonState::new(0);
        let mut x: Vec<f64> = vec![0.0; 5];
        for _ in 0..6 {
            let g = affine_step(&m, &b, &x);
            x = st.step(&x, &g);
            prop_assert_eq!(&x, &g);
        }
        let beta = st.beta();
        prop_assert!(beta.is_empty() || (beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn anderson_weights_are_affine() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (m, b) = contraction(6, &mut rng);
    let mut st = AndersonState::new(3);
    let mut x = vec![0.0; 6];
    for k in 0..8 {
        let g = affine_step(&m, &b, &x);
        x = st.step(&x, &g);
        assert_eq!(st.columns(), k.min(3));
        assert!((st.beta().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn unaccelerated_driver_reproduces_the_raw_trajectory() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (m, b) = contraction(4, &mut rng);
    let raw = trajectory(&m, &b, vec![0.0; 4], 21);
    let mut map = FnMap(|x: &[f64]| Ok(affine_step(&m, &b, x)));
    let out = solve_fixed_point(&mut map, &raw[0], Accelerator::None, StopCriteria::new(0.0, 20)).unwrap();
    assert_eq!(out.status, SolveStatus::MaxIterExceeded);
    assert_eq!(out.x, raw[20]);
    let expected: Vec<f64> =
        raw.windows(2).map(|w| norm2(&differences(w).column(0).to_vec()) / norm2(&w[1])).collect();
    assert_eq!(out.history.residuals(), expected);
}

#[test]
fn history_indices_increase_and_respect_the_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (m, b) = contraction(30, &mut rng);
    for acc in [Accelerator::None, Accelerator::Mpe(3), Accelerator::Rre(2), Accelerator::Anderson(4)] {
        let mut map = FnMap(|x: &[f64]| Ok(affine_step(&m, &b, x)));
        let out = solve_fixed_point(&mut map, &vec![1.0; 30], acc, StopCriteria::new(1e-300, 17)).unwrap();
        let idx: Vec<usize> = out.history.records.iter().map(|r| r.iter).collect();
        assert_eq!(idx, (1..=17).collect::<Vec<_>>(), "{acc:?}");
        assert!(out.history.records.windows(2).all(|w| w[1].elapsed_s >= w[0].elapsed_s));
    }
}

#[test]
fn restarted_methods_converge_on_a_linear_problem() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (_, b) = contraction(40, &mut rng);
    let mut m = DenseMatrix::zeros(40, 40);
    for i in 0..40 {
        m.set(i, i, 0.97 * i as f64 / 39.0);
        if i > 0 {
            m.set(i, i - 1, 0.01);
        }
    }
    let mut plain_map = FnMap(|x: &[f64]| Ok(affine_step(&m, &b, x)));
    let plain = picard_solve(&mut plain_map, &vec![0.0; 40], StopCriteria::new(1e-12, 2000)).unwrap();
    assert!(plain.converged());
    for method in [Extrapolation::Mpe, Extrapolation::Rre] {
        let mut map = FnMap(|x: &[f64]| Ok(affine_step(&m, &b, x)));
        let out = restarted_solve(&mut map, &vec![0.0; 40], method, 4, StopCriteria::new(1e-12, 2000)).unwrap();
        assert!(out.converged() && out.iterations() <= plain.iterations(), "{method:?} {} {}", out.iterations(), plain.iterations());
        let mut map = FnMap(|x: &[f64]| Ok(affine_step(&m, &b, x)));
        assert!(restarted_solve(&mut map, &[0.0; 40], method, 0, StopCriteria::new(1e-12, 5)).is_err());
    }
    let mut map = FnMap(|x: &[f64]| Ok(affine_step(&m, &b, x)));
    let aa = anderson_solve(&mut map, &vec![0.0; 40], 5, StopCriteria::new(1e-12, 2000)).unwrap();
    assert!(aa.converged() && aa.iterations() < plain.iterations());
}

#[test]
fn diverging_map_is_reported() {
    let mut map = FnMap(|x: &[f64]| Ok(x.iter().map(|v| 3.0 * v + 1.0).collect::<Vec<f64>>()));
    let out = picard_solve(&mut map, &[1.0, 2.0], StopCriteria::new(1e-10, 10_000)).unwrap();
    assert!(matches!(out.status, SolveStatus::Diverged | SolveStatus::MaxIterExceeded));
    assert!(out.iterations() < 10_000);
}
