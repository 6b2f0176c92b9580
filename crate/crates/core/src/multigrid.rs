//! Geometric multigrid over nested uniform spline spaces.
//!
//! Levels are stored coarse to fine. Every operator acts on interior degrees
//! of freedom only (homogeneous Dirichlet elimination). Prolongation is the
//! knot-insertion matrix restricted to interior functions and restriction is
//! its transpose.

use crate::bspline::refine_dyadic;
use crate::error::{Error, Result};
use crate::iga::{assemble_stiffness, SplineSpace};
use crate::linalg::{norm2, LuFactors, SparseMatrix};

/// Interior functions per direction at or below which a level is solved
/// directly.
pub const DIRECT_SOLVE_THRESHOLD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coarsening {
    /// `A_coarse = Pᵀ A_fine P`
    Galerkin,
    /// Stiffness matrix assembled on the coarse space.
    Rediscretize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherConfig {
    pub omega: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self { omega: 2.0 / 3.0, pre_sweeps: 1, post_sweeps: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub space: SplineSpace,
    pub operator: SparseMatrix,
    /// Prolongation from the next coarser level (absent on the coarsest).
    pub prolongation: Option<SparseMatrix>,
    /// Restriction to the next coarser level, `Pᵀ`.
    pub restriction: Option<SparseMatrix>,
    inv_diag: Vec<f64>,
}

impl Level {
    pub fn n_dof(&self) -> usize {
        self.operator.rows()
    }
}

#[derive(Debug, Clone)]
pub struct GridHierarchy {
    levels: Vec<Level>,
    coarse_solver: LuFactors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub initial_residual_norm: f64,
    pub final_residual_norm: f64,
    pub levels_visited: usize,
    pub cycles: usize,
    pub converged: bool,
}

impl CycleReport {
    /// `MaxIterExceeded` when the tolerance was not met.
    pub fn check(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::MaxIterExceeded { residual: self.final_residual_norm })
        }
    }
}

/// Interior prolongation between a space and its coarsening.
pub fn interior_prolongation(coarse: &SplineSpace) -> SparseMatrix {
    let mats: Vec<SparseMatrix> = coarse
        .bases()
        .iter()
        .map(|kv| {
            let p = refine_dyadic(kv).matrix;
            let fine: Vec<usize> = (1..p.rows() - 1).collect();
            let coarse: Vec<usize> = (1..p.cols() - 1).collect();
            p.submatrix(&fine, &coarse)
        })
        .collect();
    match mats.len() {
        1 => mats.into_iter().next().unwrap(),
        _ => SparseMatrix::kron(&mats[0], &mats[1]),
    }
}

fn interior_stiffness(space: &SplineSpace) -> SparseMatrix {
    let idx = space.interior_indices();
    assemble_stiffness(space).submatrix(&idx, &idx)
}

fn inverse_diagonal(a: &SparseMatrix) -> Result<Vec<f64>> {
    a.diagonal()
        .iter()
        .enumerate()
        .map(|(row, &d)| if d == 0.0 { Err(Error::ZeroDiagonal { row }) } else { Ok(1.0 / d) })
        .collect()
}

fn min_interior_per_dir(space: &SplineSpace) -> usize {
    (0..space.dims()).map(|d| space.n_per_dir(d).saturating_sub(2)).min().unwrap()
}

/// Builds `n_levels` levels by repeated halving of the element count.
pub fn build_hierarchy(fine: &SplineSpace, n_levels: usize, coarsening: Coarsening) -> Result<GridHierarchy> {
    if n_levels == 0 {
        return Err(Error::TooCoarse("at least one level is required".into()));
    }
    let mut spaces = vec![fine.clone()];
    for _ in 1..n_levels {
        let c = spaces.last().unwrap().coarsened()?;
        spaces.push(c);
    }
    spaces.reverse();
    for s in &spaces {
        if min_interior_per_dir(s) == 0 {
            return Err(Error::TooCoarse("a level has no interior degrees of freedom".into()));
        }
    }

    let mut ops = vec![interior_stiffness(fine)];
    let mut prolongations = Vec::new();
    for l in (0..spaces.len() - 1).rev() {
        let p = interior_prolongation(&spaces[l]);
        let coarse = match coarsening {
            Coarsening::Galerkin => {
                let fine_op = ops.last().unwrap();
                p.transpose().matmul(&fine_op.matmul(&p))
            }
            Coarsening::Rediscretize => interior_stiffness(&spaces[l]),
        };
        ops.push(coarse);
        prolongations.push(p);
    }
    ops.reverse();
    prolongations.reverse();

    let coarse_solver = LuFactors::factor(&ops[0].to_dense())?;
    let mut levels = Vec::with_capacity(spaces.len());
    for (l, (space, operator)) in spaces.into_iter().zip(ops).enumerate() {
        let prolongation = if l == 0 { None } else { Some(prolongations[l - 1].clone()) };
        let restriction = prolongation.as_ref().map(|p| p.transpose());
        let inv_diag = inverse_diagonal(&operator)?;
        levels.push(Level { space, operator, prolongation, restriction, inv_diag });
    }
    Ok(GridHierarchy { levels, coarse_solver })
}

impl GridHierarchy {
    /// Coarsens until every direction has at most
    /// [`DIRECT_SOLVE_THRESHOLD`] interior functions (or halving stops).
    pub fn auto(fine: &SplineSpace, coarsening: Coarsening) -> Result<Self> {
        Self::with_threshold(fine, coarsening, DIRECT_SOLVE_THRESHOLD)
    }

    /// Like [`GridHierarchy::auto`] with a custom coarsest-level size.
    pub fn with_threshold(fine: &SplineSpace, coarsening: Coarsening, threshold: usize) -> Result<Self> {
        let mut n = 1;
        let mut s = fine.clone();
        while (0..s.dims()).any(|d| s.n_per_dir(d).saturating_sub(2) > threshold) {
            match s.coarsened() {
                Ok(c) if min_interior_per_dir(&c) > 0 => {
                    s = c;
                    n += 1;
                }
                _ => break,
            }
        }
        build_hierarchy(fine, n, coarsening)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &Level {
        self.levels.last().unwrap()
    }

    pub fn fine_operator(&self) -> &SparseMatrix {
        &self.finest().operator
    }

    fn jacobi(&self, l: usize, b: &[f64], x: &mut [f64], omega: f64, sweeps: usize) {
        let lv = &self.levels[l];
        let mut ax = vec![0.0; x.len()];
        for _ in 0..sweeps {
            lv.operator.matvec_into(x, &mut ax);
            for i in 0..x.len() {
                x[i] += omega * lv.inv_diag[i] * (b[i] - ax[i]);
            }
        }
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut Vec<f64>, cfg: &SmootherConfig) {
        if l == 0 {
            *x = self.coarse_solver.solve(b);
            return;
        }
        let lv = &self.levels[l];
        self.jacobi(l, b, x, cfg.omega, cfg.pre_sweeps);
        let r = lv.operator.residual(b, x);
        let rc = lv.restriction.as_ref().unwrap().matvec(&r);
        let mut ec = vec![0.0; rc.len()];
        self.cycle(l - 1, &rc, &mut ec, cfg);
        let e = lv.prolongation.as_ref().unwrap().matvec(&ec);
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += ei;
        }
        self.jacobi(l, b, x, cfg.omega, cfg.post_sweeps);
    }

    fn check_sizes(&self, b: &[f64], x0: &[f64]) -> Result<()> {
        let n = self.finest().n_dof();
        for v in [b, x0] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
        Ok(())
    }
}

/// `sweeps` weighted Jacobi steps `x <- x + ω D⁻¹ (b - A x)`.
pub fn smooth(a: &SparseMatrix, b: &[f64], x: &[f64], cfg: &SmootherConfig, sweeps: usize) -> Result<Vec<f64>> {
    let inv = inverse_diagonal(a)?;
    let mut x = x.to_vec();
    for _ in 0..sweeps {
        let r = a.residual(b, &x);
        for i in 0..x.len() {
            x[i] += cfg.omega * inv[i] * r[i];
        }
    }
    Ok(x)
}

/// One V-cycle on the finest level.
pub fn v_cycle(h: &GridHierarchy, b: &[f64], x0: &[f64], cfg: &SmootherConfig) -> Result<(Vec<f64>, CycleReport)> {
    h.check_sizes(b, x0)?;
    let a = h.fine_operator();
    let r0 = norm2(&a.residual(b, x0));
    let mut x = x0.to_vec();
    h.cycle(h.n_levels() - 1, b, &mut x, cfg);
    let r1 = norm2(&a.residual(b, &x));
    let report = CycleReport {
        initial_residual_norm: r0,
        final_residual_norm: r1,
        levels_visited: h.n_levels(),
        cycles: 1,
        converged: true,
    };
    Ok((x, report))
}

/// Repeats V-cycles until `||b - A x|| <= tol ||b||` (absolute when `b = 0`)
/// or `maxiter` cycles were spent. Not reaching the tolerance is reported in
/// the returned [`CycleReport`], not as an error.
pub fn solve_to_tolerance(
    h: &GridHierarchy,
    b: &[f64],
    x0: &[f64],
    cfg: &SmootherConfig,
    tol: f64,
    maxiter: usize,
) -> Result<(Vec<f64>, CycleReport)> {
    h.check_sizes(b, x0)?;
    let a = h.fine_operator();
    let bn = norm2(b);
    let target = if bn > 0.0 { tol * bn } else { tol };
    let mut x = x0.to_vec();
    let r0 = norm2(&a.residual(b, &x));
    let mut r = r0;
    let mut cycles = 0;
    while r > target && cycles < maxiter {
        h.cycle(h.n_levels() - 1, b, &mut x, cfg);
        r = norm2(&a.residual(b, &x));
        cycles += 1;
        if !r.is_finite() {
            return Err(Error::Diverged { residual: r });
        }
    }
    let report = CycleReport {
        initial_residual_norm: r0,
        final_residual_norm: r,
        levels_visited: h.n_levels(),
        cycles,
        converged: r <= target,
    };
    Ok((x, report))
}

/// Two-grid cycle: smoothing on the finest level and an exact solve on the
/// next coarser one.
pub fn two_grid(h: &GridHierarchy, b: &[f64], x0: &[f64], cfg: &SmootherConfig) -> Result<Vec<f64>> {
    h.check_sizes(b, x0)?;
    let l = h.n_levels() - 1;
    if l == 0 {
        return Ok(h.coarse_solver.solve(b));
    }
    let lv = &h.levels[l];
    let coarse = LuFactors::factor(&h.levels[l - 1].operator.to_dense())?;
    let mut x = x0.to_vec();
    h.jacobi(l, b, &mut x, cfg.omega, cfg.pre_sweeps);
    let r = lv.operator.residual(b, &x);
    let ec = coarse.solve(&lv.restriction.as_ref().unwrap().matvec(&r));
    let e = lv.prolongation.as_ref().unwrap().matvec(&ec);
    for (xi, ei) in x.iter_mut().zip(&e) {
        *xi += ei;
    }
    h.jacobi(l, b, &mut x, cfg.omega, cfg.post_sweeps);
    Ok(x)
}
