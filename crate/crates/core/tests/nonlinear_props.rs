use std::f64::consts::PI;

use picard_mg::extrapolation::{Accelerator, FixedPointMap, SolveStatus};
use picard_mg::iga::l2_projection;
use picard_mg::linalg::{lu_solve, norm2, DenseMatrix};
use picard_mg::nonlinear::{
    run_outer, BratuProblem, InnerSolver, MongeAmpereProblem, OuterConfig, PicardMap, Problem,
};

// Dense reference for one 1D Bratu Picard step on an open uniform knot
// vector, built from the recursive basis definition and Newton-computed
// Gauss-Legendre points.
mod oracle {
    pub fn knots(p: usize, n: usize) -> Vec<f64> {
        let mut t = vec![0.0; p + 1];
        t.extend((1..n).map(|i| i as f64 / n as f64));
        t.extend(vec![1.0; p + 1]);
        t
    }

    fn frac(a: f64, b: f64) -> f64 {
        if b == 0.0 { 0.0 } else { a / b }
    }

    pub fn basis(t: &[f64], i: usize, p: usize, x: f64) -> f64 {
        if p == 0 {
            return if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 };
        }
        frac(x - t[i], t[i + p] - t[i]) * basis(t, i, p - 1, x)
            + frac(t[i + p + 1] - x, t[i + p + 1] - t[i + 1]) * basis(t, i + 1, p - 1, x)
    }

    pub fn dbasis(t: &[f64], i: usize, p: usize, x: f64) -> f64 {
        p as f64 * (frac(basis(t, i, p - 1, x), t[i + p] - t[i]) - frac(basis(t, i + 1, p - 1, x), t[i + p + 1] - t[i + 1]))
    }

    pub fn gauss(m: usize) -> Vec<(f64, f64)> {
        (0..m)
            .map(|k| {
                let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
                let mut dp = 1.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for j in 2..=m {
                        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    let pm = if m == 1 { x } else { p1 };
                    let pm1 = if m == 1 { 1.0 } else { p0 };
                    dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
                    let dx = pm / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    }

    /// Quadrature points and weights on `[0, 1]` with `p + 1` points per element.
    pub fn points(p: usize, n: usize) -> Vec<(f64, f64)> {
        let g = gauss(p + 1);
        let h = 1.0 / n as f64;
        (0..n).flat_map(|e| g.iter().map(move |&(x, w)| (h * (e as f64 + 0.5 * (x + 1.0)), 0.5 * h * w))).collect()
    }
}

fn oracle_bratu_step(lambda: f64, p: usize, n: usize, k: f64, u: &[f64]) -> Vec<f64> {
    let t = oracle::knots(p, n);
    let nb = n + p;
    let mut stiff = DenseMatrix::zeros(nb - 2, nb - 2);
    let mut load = vec![0.0; nb - 2];
    let w = 2.0 * PI * k;
    for (x, wt) in oracle::points(p, n) {
        let b: Vec<f64> = (0..nb).map(|i| oracle::basis(&t, i, p, x)).collect();
        let db: Vec<f64> = (0..nb).map(|i| oracle::dbasis(&t, i, p, x)).collect();
        let uh: f64 = b.iter().zip(u).map(|(a, c)| a * c).sum();
        let s = (w * x).sin();
        let rhs = w * w * s + lambda * s.exp() - lambda * uh.exp();
        for i in 1..nb - 1 {
            load[i - 1] += wt * rhs * b[i];
            for j in 1..nb - 1 {
                stiff.add(i - 1, j - 1, wt * db[i] * db[j]);
            }
        }
    }
    let mut out = vec![0.0];
    out.extend(lu_solve(&stiff, &load).unwrap());
    out.push(0.0);
    out
}

fn direct_cfg(acc: Accelerator, tol: f64, maxiter: usize) -> OuterConfig {
    OuterConfig { inner: InnerSolver::Direct, ..OuterConfig::bratu(acc, tol, maxiter) }
}

fn projected_exact(p: usize, n: usize) -> Vec<f64> {
    let space = picard_mg::iga::SplineSpace::unit(1, p, n).unwrap();
    let mut c = l2_projection(&space, &|x: &[f64]| (2.0 * PI * x[0]).sin()).unwrap().coefficients;
    let last = c.len() - 1;
    c[0] = 0.0;
    c[last] = 0.0;
    c
}

#[test]
fn bratu_step_matches_the_dense_oracle() {
    for (lambda, p, n) in [(1.0, 3, 16), (7.0, 2, 8), (0.5, 1, 12)] {
        let prob = Problem::Bratu(BratuProblem::manufactured_1d(lambda, p, n, 1).unwrap());
        let mut map = PicardMap::new(&prob, &direct_cfg(Accelerator::None, 1e-12, 1)).unwrap();
        let u: Vec<f64> = (0..n + p).map(|i| if i == 0 || i == n + p - 1 { 0.0 } else { 0.3 * (i as f64).cos() }).collect();
        let got = map.apply(&u).unwrap();
        let want = oracle_bratu_step(lambda, p, n, 1.0, &u);
        let diff = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "lambda={lambda} p={p} n={n} diff={diff}");
    }
}

#[test]
fn fixed_point_defect_at_the_projected_solution() {
    // Oracle value for lambda = 1, p = 3, 16 elements.
    let u = projected_exact(3, 16);
    let g = oracle_bratu_step(1.0, 3, 16, 1.0, &u);
    let defect = norm2(&g.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
    assert!((defect - 1.949741e-5).abs() < 1e-11, "{defect:e}");

    let prob = Problem::Bratu(BratuProblem::manufactured_1d(1.0, 3, 16, 1).unwrap());
    let mut map = PicardMap::new(&prob, &direct_cfg(Accelerator::None, 1e-12, 1)).unwrap();
    let g = map.apply(&u).unwrap();
    let d = g.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>();
    assert!((norm2(&d) - 1.949741e-5).abs() < 1e-10);
    assert!((norm2(&d) / norm2(&g) - 6.704614e-6).abs() < 1e-11);
}

#[test]
fn linear_problem_converges_immediately_with_direct_inner() {
    let prob = Problem::Bratu(BratuProblem::manufactured_1d(0.0, 2, 16, 1).unwrap());
    let out = run_outer(&prob, &direct_cfg(Accelerator::None, 1e-12, 10)).unwrap();
    assert!(out.converged() && out.iterations() <= 2, "{}", out.iterations());
    let mut map = PicardMap::new(&prob, &direct_cfg(Accelerator::None, 1e-12, 1)).unwrap();
    let x = out.field.coefficients.clone();
    let y = map.apply(&x).unwrap();
    assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-13));
}

#[test]
fn linear_problem_with_multigrid_inner() {
    let prob = Problem::Bratu(BratuProblem::manufactured_1d(0.0, 3, 64, 1).unwrap());
    let out = run_outer(&prob, &OuterConfig::bratu(Accelerator::None, 1e-10, 200)).unwrap();
    assert!(out.converged() && out.iterations() < 40, "{}", out.iterations());
    assert!(out.history.records.iter().all(|r| r.elapsed_s >= 0.0 && r.rhs_s >= 0.0 && r.mg_s >= 0.0));
}

#[test]
fn error_decreases_under_mesh_refinement() {
    for p in 1..=3 {
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let prob = Problem::Bratu(BratuProblem::manufactured_1d(1.0, p, n, 1).unwrap());
                run_outer(&prob, &direct_cfg(Accelerator::Rre(3), 1e-12, 200)).unwrap().l2_error().unwrap()
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > p as f64 + 0.5, "p={p} errs={errs:?}");
        }
    }
}

#[test]
fn monge_ampere_defect_shrinks_with_refinement() {
    let mut last = f64::INFINITY;
    for n in [4, 8, 16] {
        let prob = MongeAmpereProblem::manufactured(2, n).unwrap();
        let exact = prob.exact.clone().unwrap();
        let u = l2_projection(&prob.space, &*exact).unwrap().coefficients;
        let cfg = OuterConfig { inner: InnerSolver::Direct, ..OuterConfig::monge_ampere(Accelerator::None, 1e-10, 1, 1e-8) };
        let mut map = PicardMap::new(&Problem::MongeAmpere(prob), &cfg).unwrap();
        let g = map.apply(&u).unwrap();
        let rel = norm2(&g.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm2(&g);
        assert!(rel < 5e-4 && rel < last, "n={n} rel={rel:e}");
        last = rel;
    }
}

#[test]
fn monge_ampere_converges_on_a_small_grid() {
    let prob = Problem::MongeAmpere(MongeAmpereProblem::manufactured(2, 8).unwrap());
    let out = run_outer(&prob, &OuterConfig::monge_ampere(Accelerator::Mpe(5), 1e-10, 200, 1e-2)).unwrap();
    assert!(out.converged());
    assert!(out.l2_error().unwrap() < 1e-3);
    assert!(out.max_clamped_fraction == 0.0);
    let low = Problem::MongeAmpere(MongeAmpereProblem::manufactured(1, 8).unwrap());
    assert!(run_outer(&low, &OuterConfig::monge_ampere(Accelerator::None, 1e-10, 5, 1e-2)).is_err());
}

#[test]
fn large_lambda_fails_without_panicking() {
    for lambda in [30.0, 60.0] {
        let prob = Problem::Bratu(BratuProblem::manufactured_1d(lambda, 2, 8, 1).unwrap());
        let out = run_outer(&prob, &OuterConfig::bratu(Accelerator::None, 1e-12, 300)).unwrap();
        assert!(!out.converged());
        assert!(matches!(out.status, SolveStatus::MaxIterExceeded | SolveStatus::Diverged));
    }
}

#[test]
fn plain_picard_stalls_at_lambda_seven_while_rre_converges() {
    let prob = Problem::Bratu(BratuProblem::manufactured_1d(7.0, 3, 32, 1).unwrap());
    let plain = run_outer(&prob, &OuterConfig::bratu(Accelerator::None, 1e-10, 1000)).unwrap();
    let rre = run_outer(&prob, &OuterConfig::bratu(Accelerator::Rre(5), 1e-10, 1000)).unwrap();
    assert_eq!(plain.status, SolveStatus::MaxIterExceeded);
    assert!(plain.relative_residual() > 1e-3);
    assert!(rre.converged() && rre.iterations() < 100);
    assert!(rre.l2_error().unwrap() < 1e-4);
}

#[test]
fn wrong_length_is_rejected() {
    let prob = Problem::Bratu(BratuProblem::manufactured_1d(1.0, 2, 8, 1).unwrap());
    let mut map = PicardMap::new(&prob, &OuterConfig::bratu(Accelerator::None, 1e-10, 5)).unwrap();
    assert!(map.apply(&[0.0; 3]).is_err());
}
