//! Vector-sequence acceleration for fixed-point iterations.
//!
//! [`mpe_extrapolate`] and [`rre_extrapolate`] combine a window of iterates
//! `s_k .. s_{k+q+1}` into `t = Σ γ_j s_{k+j}` with `Σ γ_j = 1`, using a QR
//! factorisation of the first differences. [`AndersonState`] implements
//! Anderson mixing in its unconstrained least-squares form. The drivers at
//! the bottom of the file count one iteration per map evaluation and test
//! `||U^n - U^{n-1}|| / ||U^n||` after every evaluation.

use std::collections::VecDeque;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::history::{IterationHistory, IterationRecord, PhaseTimes};
use crate::linalg::{
    axpy, least_squares, norm2, solve_normal_equations, solve_upper_triangular, sub, DenseMatrix, IncrementalQr,
    LuFactors,
};

/// Iterates `s_k .. s_{k+q+1}` stored as a base point and first differences.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateWindow {
    base: Vec<f64>,
    differences: DenseMatrix,
}

impl IterateWindow {
    /// Needs at least two iterates of equal length.
    pub fn new(iterates: &[Vec<f64>]) -> Result<Self> {
        if iterates.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: iterates.len() });
        }
        let n = iterates[0].len();
        let mut cols = Vec::with_capacity(iterates.len() - 1);
        for w in iterates.windows(2) {
            if w[1].len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: w[1].len() });
            }
            cols.push(sub(&w[1], &w[0]));
        }
        Ok(Self { base: iterates[0].clone(), differences: DenseMatrix::from_columns(&cols)? })
    }

    /// Window size `q`; the window holds `q + 1` differences.
    pub fn q(&self) -> usize {
        self.differences.cols() - 1
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// Columns `Δs_k .. Δs_{k+q}`.
    pub fn differences(&self) -> &DenseMatrix {
        &self.differences
    }

    /// Columns `Δ²s_k .. Δ²s_{k+q-1}`.
    pub fn second_differences(&self) -> DenseMatrix {
        let q = self.q();
        let mut d2 = DenseMatrix::zeros(self.dim(), q);
        for j in 0..q {
            let c = sub(self.differences.column(j + 1), self.differences.column(j));
            d2.column_mut(j).copy_from_slice(&c);
        }
        d2
    }

    /// Iterate `s_{k+j}`.
    pub fn iterate(&self, j: usize) -> Vec<f64> {
        let mut s = self.base.clone();
        for c in 0..j {
            axpy(1.0, self.differences.column(c), &mut s);
        }
        s
    }

    /// The window restricted to its first `q + 2` iterates.
    pub fn truncated(&self, q: usize) -> Self {
        assert!(q <= self.q());
        Self { base: self.base.clone(), differences: self.differences.block(self.dim(), q + 1) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationResult {
    pub t: Vec<f64>,
    /// Weights `γ_0 .. γ_q` of the iterates `s_k .. s_{k+q}`.
    pub gamma: Vec<f64>,
    pub generalized_residual_norm: f64,
    /// `λ = 1 / Σ d_i`, equal to the squared generalized residual norm (RRE only).
    pub lambda_shortcut: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    Mpe,
    Rre,
}

/// Triangular data of `ΔS = Q R`: the leading `q` columns are factored,
/// the last one is projected.
struct WindowQr {
    qr: IncrementalQr,
    /// `r_q`, the first `q` entries of the last column of `R`.
    last_coefficients: Vec<f64>,
    /// `R[q,q]` if the last column is independent.
    last_diagonal: Option<f64>,
}

fn factor_window(w: &IterateWindow) -> Result<WindowQr> {
    let q = w.q();
    let mut qr = IncrementalQr::new();
    for j in 0..q {
        qr.push_column(w.differences.column(j))?;
    }
    let last = w.differences.column(q);
    if q == 0 {
        qr.push_column(last)?;
        return Ok(WindowQr { last_diagonal: Some(qr.r_entry(0, 0)), qr, last_coefficients: vec![] });
    }
    let proj = qr.project(last);
    let independent = !qr.is_dependent(&proj);
    let last_coefficients = proj.coefficients.clone();
    let last_diagonal = if independent {
        qr.push_column(last)?;
        Some(proj.remainder_norm)
    } else {
        None
    };
    Ok(WindowQr { qr, last_coefficients, last_diagonal })
}

/// Leading `q x q` block of `R`.
fn leading_r(f: &WindowQr, q: usize) -> DenseMatrix {
    let mut r = DenseMatrix::zeros(q, q);
    for j in 0..q {
        for i in 0..=j {
            r.set(i, j, f.qr.r_entry(i, j));
        }
    }
    r
}

/// `d = (d', 1)` with `R_q d' = -r_q`, a null vector of `ΔS` when the last
/// column is dependent.
fn annihilating_weights(f: &WindowQr, q: usize) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = f.last_coefficients.iter().map(|v| -v).collect();
    let mut d = solve_upper_triangular(&leading_r(f, q), &rhs)?;
    d.push(1.0);
    Ok(d)
}

/// Normalises `d` into `γ` and forms `t = s_k + Q_q R_q α`.
fn combine(w: &IterateWindow, f: &WindowQr, d: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let q = w.q();
    let sum: f64 = d.iter().sum();
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    let lambda = 1.0 / sum;
    let gamma: Vec<f64> = d.iter().map(|v| v * lambda).collect();
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::ZeroDenominator);
    }
    let mut alpha = Vec::with_capacity(q);
    let mut acc = 1.0;
    for g in &gamma[..q] {
        acc -= g;
        alpha.push(acc);
    }
    let mut y = vec![0.0; q];
    for i in 0..q {
        for j in i..q {
            y[i] += f.qr.r_entry(i, j) * alpha[j];
        }
    }
    let mut t = w.base.clone();
    for (i, &yi) in y.iter().enumerate() {
        axpy(yi, f.qr.q_column(i), &mut t);
    }
    Ok((t, gamma, lambda))
}

/// One-column windows return the newest iterate `s_{k+1}`.
fn trivial_window(w: &IterateWindow, f: &WindowQr, method: Extrapolation) -> ExtrapolationResult {
    let r00 = f.last_diagonal.unwrap_or(0.0);
    ExtrapolationResult {
        t: w.iterate(1),
        gamma: vec![1.0],
        generalized_residual_norm: r00,
        lambda_shortcut: (method == Extrapolation::Rre).then_some(r00 * r00),
    }
}

/// Reduced rank extrapolation.
///
/// When the last difference is numerically dependent on the others, the
/// minimum of `||ΔS γ||` subject to `Σγ = 1` is zero and is attained by the
/// normalised null vector of `ΔS`; that limit is returned with `λ = 0`.
pub fn rre_extrapolate(w: &IterateWindow) -> Result<ExtrapolationResult> {
    let q = w.q();
    let f = factor_window(w)?;
    if q == 0 {
        return Ok(trivial_window(w, &f, Extrapolation::Rre));
    }
    let (d, exact) = match f.last_diagonal {
        Some(_) => {
            let r = f.qr.r_matrix();
            (solve_normal_equations(&r, &vec![1.0; q + 1])?, false)
        }
        None => (annihilating_weights(&f, q)?, true),
    };
    let (t, gamma, lambda) = combine(w, &f, &d)?;
    let lambda = if exact { 0.0 } else { lambda };
    Ok(ExtrapolationResult {
        t,
        gamma,
        generalized_residual_norm: lambda.max(0.0).sqrt(),
        lambda_shortcut: Some(lambda),
    })
}

/// Minimal polynomial extrapolation.
pub fn mpe_extrapolate(w: &IterateWindow) -> Result<ExtrapolationResult> {
    let q = w.q();
    let f = factor_window(w)?;
    if q == 0 {
        return Ok(trivial_window(w, &f, Extrapolation::Mpe));
    }
    let d = annihilating_weights(&f, q)?;
    let (t, gamma, _) = combine(w, &f, &d)?;
    let generalized_residual_norm = norm2(&generalized_residual(w, Extrapolation::Mpe)?);
    Ok(ExtrapolationResult { t, gamma, generalized_residual_norm, lambda_shortcut: None })
}

pub fn extrapolate(w: &IterateWindow, method: Extrapolation) -> Result<ExtrapolationResult> {
    match method {
        Extrapolation::Mpe => mpe_extrapolate(w),
        Extrapolation::Rre => rre_extrapolate(w),
    }
}

/// `r̃ = Δs_k - Δ²S (YᵀΔ²S)⁻¹ YᵀΔs_k` with `Y = Δ²S` (RRE) or `Y = ΔS_q` (MPE),
/// evaluated directly from the definition.
pub fn generalized_residual(w: &IterateWindow, method: Extrapolation) -> Result<Vec<f64>> {
    let q = w.q();
    let ds0 = w.differences.column(0).to_vec();
    if q == 0 {
        return Ok(ds0);
    }
    let d2 = w.second_differences();
    let c = match method {
        Extrapolation::Rre => least_squares(&d2, &ds0)?,
        Extrapolation::Mpe => {
            let y = w.differences.block(w.dim(), q);
            let m = y.transpose().matmul(&d2);
            LuFactors::factor(&m)?.solve(&y.tr_matvec(&ds0))
        }
    };
    Ok(sub(&ds0, &d2.matvec(&c)))
}

/// Anderson mixing with depth `m` in unconstrained least-squares form.
#[derive(Debug, Clone)]
pub struct AndersonState {
    depth: usize,
    f_hist: VecDeque<Vec<f64>>,
    g_hist: VecDeque<Vec<f64>>,
    theta: Vec<f64>,
}

impl AndersonState {
    pub fn new(depth: usize) -> Self {
        Self { depth, f_hist: VecDeque::new(), g_hist: VecDeque::new(), theta: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of difference columns used by the last step.
    pub fn columns(&self) -> usize {
        self.theta.len()
    }

    /// Least-squares coefficients of the last step.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Mixing weights `β` of the retained `G(s_i)`, oldest first.
    pub fn beta(&self) -> Vec<f64> {
        beta_from_theta(&self.theta)
    }

    /// Records `(s_k, G(s_k))` and returns the next iterate
    /// `G(s_k) - G_k θ`.
    pub fn step(&mut self, s: &[f64], g: &[f64]) -> Vec<f64> {
        if self.depth == 0 {
            self.theta.clear();
            return g.to_vec();
        }
        self.f_hist.push_back(sub(g, s));
        self.g_hist.push_back(g.to_vec());
        while self.f_hist.len() > self.depth + 1 {
            self.f_hist.pop_front();
            self.g_hist.pop_front();
        }
        loop {
            let m = self.f_hist.len() - 1;
            if m == 0 {
                self.theta.clear();
                return g.to_vec();
            }
            let mut qr = IncrementalQr::new();
            let mut ok = true;
            for i in 0..m {
                if qr.push_column(&sub(&self.f_hist[i + 1], &self.f_hist[i])).is_err() {
                    ok = false;
                    break;
                }
            }
            if !ok {
                self.f_hist.pop_front();
                self.g_hist.pop_front();
                continue;
            }
            let fk = &self.f_hist[m];
            let qtf: Vec<f64> = (0..m).map(|i| crate::linalg::dot(qr.q_column(i), fk)).collect();
            let theta = match solve_upper_triangular(&qr.r_matrix(), &qtf) {
                Ok(t) => t,
                Err(_) => {
                    self.f_hist.pop_front();
                    self.g_hist.pop_front();
                    continue;
                }
            };
            let mut x = g.to_vec();
            for (i, &th) in theta.iter().enumerate() {
                let dg = sub(&self.g_hist[i + 1], &self.g_hist[i]);
                axpy(-th, &dg, &mut x);
            }
            self.theta = theta;
            return x;
        }
    }
}

/// `β_0 = θ_0`, `β_i = θ_i - θ_{i-1}`, `β_m = 1 - θ_{m-1}`.
pub fn beta_from_theta(theta: &[f64]) -> Vec<f64> {
    let m = theta.len();
    if m == 0 {
        return vec![1.0];
    }
    let mut beta = Vec::with_capacity(m + 1);
    beta.push(theta[0]);
    for i in 1..m {
        beta.push(theta[i] - theta[i - 1]);
    }
    beta.push(1.0 - theta[m - 1]);
    beta
}

/// A fixed-point map `x -> G(x)` with optional diagnostics.
pub trait FixedPointMap {
    fn apply(&mut self, x: &[f64]) -> Result<Vec<f64>>;

    /// Error against a known solution, recorded in the history.
    fn l2_error(&mut self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Cumulative phase timings of the map.
    fn phase_times(&self) -> PhaseTimes {
        PhaseTimes::default()
    }

    /// Norm used in the relative residual.
    fn norm(&self, v: &[f64]) -> f64 {
        norm2(v)
    }
}

/// Adapts a closure into a [`FixedPointMap`].
pub struct FnMap<F>(pub F);

impl<F: FnMut(&[f64]) -> Result<Vec<f64>>> FixedPointMap for FnMap<F> {
    fn apply(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accelerator {
    None,
    Mpe(usize),
    Rre(usize),
    Anderson(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    pub tol: f64,
    /// Maximum number of map evaluations.
    pub maxiter: usize,
    /// Relative residuals above this value count as divergence.
    pub divergence_threshold: f64,
}

impl StopCriteria {
    pub fn new(tol: f64, maxiter: usize) -> Self {
        Self { tol, maxiter, divergence_threshold: 1e10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterExceeded,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    /// Last map output (or the initial guess if nothing was evaluated).
    pub x: Vec<f64>,
    pub history: IterationHistory,
    pub status: SolveStatus,
}

impl FixedPointOutcome {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn iterations(&self) -> usize {
        self.history.iterations()
    }
}

enum Eval {
    Continue(Vec<f64>),
    Stop(Vec<f64>, SolveStatus),
}

struct Driver<'a, M: FixedPointMap + ?Sized> {
    map: &'a mut M,
    stop: StopCriteria,
    history: IterationHistory,
    start: Instant,
    extrapolation_s: f64,
}

impl<'a, M: FixedPointMap + ?Sized> Driver<'a, M> {
    fn new(map: &'a mut M, stop: StopCriteria) -> Self {
        Self { map, stop, history: IterationHistory::new(), start: Instant::now(), extrapolation_s: 0.0 }
    }

    fn exhausted(&self) -> bool {
        self.history.iterations() >= self.stop.maxiter
    }

    /// Evaluates `G(x)`, records the residual and decides whether to stop.
    fn eval(&mut self, x: &[f64]) -> Result<Eval> {
        if self.exhausted() {
            return Ok(Eval::Stop(x.to_vec(), SolveStatus::MaxIterExceeded));
        }
        let y = match self.map.apply(x) {
            Ok(y) => y,
            Err(Error::Overflow { .. }) | Err(Error::Diverged { .. }) => {
                self.record(f64::INFINITY, None);
                return Ok(Eval::Stop(x.to_vec(), SolveStatus::Diverged));
            }
            Err(e) => return Err(e),
        };
        let num = self.map.norm(&sub(&y, x));
        let den = self.map.norm(&y);
        let res = if den > 0.0 { num / den } else { num };
        let err = if res.is_finite() { self.map.l2_error(&y) } else { None };
        self.record(res, err);
        if !res.is_finite() || res > self.stop.divergence_threshold {
            return Ok(Eval::Stop(y, SolveStatus::Diverged));
        }
        if res <= self.stop.tol {
            return Ok(Eval::Stop(y, SolveStatus::Converged));
        }
        if self.exhausted() {
            return Ok(Eval::Stop(y, SolveStatus::MaxIterExceeded));
        }
        Ok(Eval::Continue(y))
    }

    fn record(&mut self, relative_residual: f64, l2_error: Option<f64>) {
        let phases = self.map.phase_times();
        let iter = self.history.iterations() + 1;
        self.history.push(IterationRecord {
            iter,
            relative_residual,
            l2_error,
            elapsed_s: self.start.elapsed().as_secs_f64(),
            rhs_s: phases.rhs_s,
            mg_s: phases.mg_s,
            extrapolation_s: self.extrapolation_s,
        });
    }

    fn finish(self, x: Vec<f64>, status: SolveStatus) -> FixedPointOutcome {
        FixedPointOutcome { x, history: self.history, status }
    }
}

/// Plain iteration `x <- G(x)`.
pub fn picard_solve<M: FixedPointMap + ?Sized>(map: &mut M, x0: &[f64], stop: StopCriteria) -> Result<FixedPointOutcome> {
    let mut d = Driver::new(map, stop);
    let mut x = x0.to_vec();
    loop {
        match d.eval(&x)? {
            Eval::Continue(y) => x = y,
            Eval::Stop(y, s) => return Ok(d.finish(y, s)),
        }
    }
}

/// Extrapolates with the largest usable window `q' <= q`; falls back to the
/// newest iterate when every window is degenerate.
fn extrapolate_with_shrink(iterates: &[Vec<f64>], method: Extrapolation) -> Vec<f64> {
    let newest = iterates.last().unwrap().clone();
    let Ok(w) = IterateWindow::new(iterates) else {
        return newest;
    };
    for q in (1..=w.q()).rev() {
        if let Ok(r) = extrapolate(&w.truncated(q), method) {
            if r.t.iter().all(|v| v.is_finite()) {
                return r.t;
            }
        }
    }
    newest
}

/// Restarted MPE/RRE: each cycle evaluates `s_{i+1} = G(s_i)` for
/// `i = 0..=q` starting from the current point, then restarts from the
/// extrapolated `t`.
pub fn restarted_solve<M: FixedPointMap + ?Sized>(
    map: &mut M,
    x0: &[f64],
    method: Extrapolation,
    q: usize,
    stop: StopCriteria,
) -> Result<FixedPointOutcome> {
    if q == 0 {
        return Err(Error::Config("restart window q must be at least 1".into()));
    }
    let mut d = Driver::new(map, stop);
    let mut x = x0.to_vec();
    loop {
        let mut window = vec![x.clone()];
        for _ in 0..=q {
            match d.eval(window.last().unwrap())? {
                Eval::Continue(y) => window.push(y),
                Eval::Stop(y, s) => return Ok(d.finish(y, s)),
            }
        }
        let t0 = Instant::now();
        x = extrapolate_with_shrink(&window, method);
        d.extrapolation_s += t0.elapsed().as_secs_f64();
    }
}

/// Anderson-accelerated iteration with depth `m`.
pub fn anderson_solve<M: FixedPointMap + ?Sized>(
    map: &mut M,
    x0: &[f64],
    m: usize,
    stop: StopCriteria,
) -> Result<FixedPointOutcome> {
    let mut d = Driver::new(map, stop);
    let mut st = AndersonState::new(m);
    let mut s = x0.to_vec();
    loop {
        match d.eval(&s)? {
            Eval::Continue(g) => {
                let t0 = Instant::now();
                s = st.step(&s, &g);
                d.extrapolation_s += t0.elapsed().as_secs_f64();
            }
            Eval::Stop(y, st) => return Ok(d.finish(y, st)),
        }
    }
}

pub fn solve_fixed_point<M: FixedPointMap + ?Sized>(
    map: &mut M,
    x0: &[f64],
    accelerator: Accelerator,
    stop: StopCriteria,
) -> Result<FixedPointOutcome> {
    match accelerator {
        Accelerator::None => picard_solve(map, x0, stop),
        Accelerator::Mpe(q) => restarted_solve(map, x0, Extrapolation::Mpe, q, stop),
        Accelerator::Rre(q) => restarted_solve(map, x0, Extrapolation::Rre, q, stop),
        Accelerator::Anderson(m) => anderson_solve(map, x0, m, stop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine_iterates(m: &DenseMatrix, b: &[f64], s0: &[f64], count: usize) -> Vec<Vec<f64>> {
        let mut out = vec![s0.to_vec()];
        for _ in 1..count {
            let mut y = m.matvec(out.last().unwrap());
            axpy(1.0, b, &mut y);
            out.push(y);
        }
        out
    }

    fn sample_m() -> DenseMatrix {
        DenseMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, -0.2, 0.3, 0.1, 0.05, 0.0, -0.4])
    }

    fn fixed_point(m: &DenseMatrix, b: &[f64]) -> Vec<f64> {
        let mut a = DenseMatrix::identity(m.rows());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                a.add(i, j, -m.get(i, j));
            }
        }
        crate::linalg::lu_solve(&a, b).unwrap()
    }

    #[test]
    fn window_differences() {
        let it = vec![vec![0.0, 1.0], vec![1.0, 1.0], vec![3.0, 0.0]];
        let w = IterateWindow::new(&it).unwrap();
        assert_eq!(w.q(), 1);
        assert_eq!(w.differences().column(1), &[2.0, -1.0]);
        assert_eq!(w.second_differences().column(0), &[1.0, -1.0]);
        assert_eq!(w.iterate(2), it[2]);
    }

    #[test]
    fn diagonal_example_is_exact() {
        let m = DenseMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.2]);
        let it = affine_iterates(&m, &[1.0, 1.0], &[0.0, 0.0], 4);
        let w = IterateWindow::new(&it).unwrap();
        for r in [mpe_extrapolate(&w).unwrap(), rre_extrapolate(&w).unwrap()] {
            assert!((r.t[0] - 2.0).abs() < 1e-12 && (r.t[1] - 1.25).abs() < 1e-12);
            assert!((r.gamma.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_by_three_minimal_polynomial() {
        let m = sample_m();
        let b = [1.0, -1.0, 0.5];
        let xs = fixed_point(&m, &b);
        let it = affine_iterates(&m, &b, &[0.3, 0.2, -0.1], 5);
        let w = IterateWindow::new(&it).unwrap();
        for method in [Extrapolation::Mpe, Extrapolation::Rre] {
            let r = extrapolate(&w, method).unwrap();
            for (a, e) in r.t.iter().zip(&xs) {
                assert!((a - e).abs() < 1e-10, "{method:?}");
            }
            assert!(norm2(&generalized_residual(&w, method).unwrap()) < 1e-10);
        }
        let r = rre_extrapolate(&w).unwrap();
        let pinv = norm2(&generalized_residual(&w, Extrapolation::Rre).unwrap());
        assert!((r.lambda_shortcut.unwrap().sqrt() - pinv).abs() < 1e-10);
    }

    #[test]
    fn constant_sequence_is_rank_deficient() {
        let it = vec![vec![1.0, 2.0]; 4];
        let w = IterateWindow::new(&it).unwrap();
        assert_eq!(rre_extrapolate(&w).unwrap_err(), Error::RankDeficient { column: 0 });
        assert_eq!(mpe_extrapolate(&w).unwrap_err(), Error::RankDeficient { column: 0 });
    }

    #[test]
    fn one_column_window_returns_newest() {
        let it = vec![vec![0.0, 0.0], vec![1.0, 2.0]];
        let w = IterateWindow::new(&it).unwrap();
        let r = mpe_extrapolate(&w).unwrap();
        assert_eq!(r.t, vec![1.0, 2.0]);
        assert_eq!(r.gamma, vec![1.0]);
    }

    #[test]
    fn rre_residual_orthogonal_to_second_differences() {
        let it: Vec<Vec<f64>> = (0..5)
            .map(|k| (0..6).map(|i| ((k * k * 7 + i * i * 3 + k * i) as f64).sin() / (1.0 + k as f64)).collect())
            .collect();
        let w = IterateWindow::new(&it).unwrap();
        let r = generalized_residual(&w, Extrapolation::Rre).unwrap();
        let d2 = w.second_differences();
        for v in d2.tr_matvec(&r) {
            assert!(v.abs() < 1e-12);
        }
        let e = rre_extrapolate(&w).unwrap();
        assert!((e.lambda_shortcut.unwrap() - crate::linalg::dot(&r, &r)).abs() < 1e-12);
        // the residual is also ΔS γ
        let dg = w.differences().matvec(&e.gamma);
        for (a, b) in dg.iter().zip(&r) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn restarted_scalar_affine_in_one_cycle() {
        for method in [Extrapolation::Mpe, Extrapolation::Rre] {
            let mut g = FnMap(|x: &[f64]| Ok(vec![0.5 * x[0] + 1.0]));
            let out = restarted_solve(&mut g, &[0.0], method, 1, StopCriteria::new(1e-14, 50)).unwrap();
            assert!(out.converged());
            assert_eq!(out.iterations(), 3);
            assert!((out.x[0] - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_map_converges_immediately() {
        let mut g = FnMap(|x: &[f64]| Ok(x.to_vec()));
        let out = restarted_solve(&mut g, &[1.0, 2.0], Extrapolation::Rre, 3, StopCriteria::new(1e-12, 10)).unwrap();
        assert!(out.converged());
        assert_eq!(out.iterations(), 1);
        assert_eq!(out.x, vec![1.0, 2.0]);
    }

    #[test]
    fn anderson_secant_on_affine_scalar() {
        let mut st = AndersonState::new(1);
        let g = |x: f64| 0.5 * x + 1.0;
        let x1 = st.step(&[0.0], &[g(0.0)]);
        assert_eq!(x1, vec![1.0]);
        let x2 = st.step(&x1, &[g(x1[0])]);
        assert!((x2[0] - 2.0).abs() < 1e-15);
        assert_eq!(st.theta(), &[-1.0]);
        assert_eq!(st.beta(), vec![-1.0, 2.0]);
    }

    #[test]
    fn anderson_depth_zero_is_plain_iteration() {
        let g = |x: &[f64]| -> Result<Vec<f64>> { Ok(x.iter().map(|v| (v * 0.9).cos()).collect()) };
        let stop = StopCriteria::new(1e-300, 30);
        let a = anderson_solve(&mut FnMap(g), &[0.1, 0.5], 0, stop).unwrap();
        let p = picard_solve(&mut FnMap(g), &[0.1, 0.5], stop).unwrap();
        assert_eq!(a.x, p.x);
        assert_eq!(a.history.residuals(), p.history.residuals());
    }

    #[test]
    fn divergence_and_maxiter() {
        let mut g = FnMap(|x: &[f64]| Ok(vec![3.0 * x[0] + 1.0]));
        let out = picard_solve(&mut g, &[1.0], StopCriteria { divergence_threshold: 1e-3, ..StopCriteria::new(1e-12, 100) })
            .unwrap();
        assert_eq!(out.status, SolveStatus::Diverged);
        let mut g = FnMap(|x: &[f64]| Ok(vec![0.5 * x[0]+ 1.0]));
        let out = picard_solve(&mut g, &[0.0], StopCriteria::new(1e-12, 0)).unwrap();
        assert_eq!(out.status, SolveStatus::MaxIterExceeded);
        assert_eq!(out.iterations(), 0);
        assert_eq!(out.x, vec![0.0]);
        let mut g = FnMap(|_: &[f64]| Err(Error::Overflow { value: 800.0 }));
        let out = anderson_solve(&mut g, &[0.0], 2, StopCriteria::new(1e-12, 5)).unwrap();
        assert_eq!(out.status, SolveStatus::Diverged);
    }
}
