//! Picard iterations for the Bratu and Monge–Ampère problems.
//!
//! A Picard step assembles the nonlinear load from the current iterate and
//! solves a Poisson problem with the multigrid hierarchy. The resulting map
//! on full coefficient vectors is what the accelerators in
//! [`crate::extrapolation`] operate on.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::extrapolation::{solve_fixed_point, Accelerator, FixedPointMap, SolveStatus, StopCriteria};
use crate::history::{IterationHistory, PhaseTimes};
use crate::iga::{apply_dirichlet, Assembler, DirichletLayout, SplineField, SplineSpace};
use crate::linalg::{dot, BandCholesky, SparseMatrix};
use crate::multigrid::{solve_to_tolerance, v_cycle, Coarsening, GridHierarchy, SmootherConfig, DIRECT_SOLVE_THRESHOLD};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `-Δu + λ e^u = f` with homogeneous Dirichlet data.
#[derive(Clone)]
pub struct BratuProblem {
    pub lambda: f64,
    pub source: ScalarFn,
    pub exact: Option<ScalarFn>,
    pub space: SplineSpace,
}

impl BratuProblem {
    /// `u = sin(2kπx)` on the unit interval.
    pub fn manufactured_1d(lambda: f64, p: usize, n_elements: usize, k: u32) -> Result<Self> {
        let w = 2.0 * PI * k as f64;
        Ok(Self {
            lambda,
            source: Arc::new(move |x: &[f64]| {
                let s = (w * x[0]).sin();
                w * w * s + lambda * s.exp()
            }),
            exact: Some(Arc::new(move |x: &[f64]| (w * x[0]).sin())),
            space: SplineSpace::unit(1, p, n_elements)?,
        })
    }

    /// `u = (x - x²)(y - y²)` on the unit square.
    pub fn manufactured_2d(lambda: f64, p: usize, n_elements: usize) -> Result<Self> {
        Ok(Self {
            lambda,
            source: Arc::new(move |x: &[f64]| {
                let (a, b) = (x[0] - x[0] * x[0], x[1] - x[1] * x[1]);
                2.0 * (a + b) + lambda * (a * b).exp()
            }),
            exact: Some(Arc::new(|x: &[f64]| (x[0] - x[0] * x[0]) * (x[1] - x[1] * x[1]))),
            space: SplineSpace::unit(2, p, n_elements)?,
        })
    }
}

/// `det H(u) = f` on the unit square with `u = g` on the boundary.
#[derive(Clone)]
pub struct MongeAmpereProblem {
    pub source: ScalarFn,
    pub boundary: ScalarFn,
    pub exact: Option<ScalarFn>,
    pub space: SplineSpace,
}

impl MongeAmpereProblem {
    /// Radial solution `u = e^{(x²+y²)/2}`, `f = (1 + x² + y²) e^{x²+y²}`.
    pub fn manufactured(p: usize, n_elements: usize) -> Result<Self> {
        let u: ScalarFn = Arc::new(|x: &[f64]| (0.5 * (x[0] * x[0] + x[1] * x[1])).exp());
        Ok(Self {
            source: Arc::new(|x: &[f64]| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                (1.0 + r2) * r2.exp()
            }),
            boundary: u.clone(),
            exact: Some(u),
            space: SplineSpace::unit(2, p, n_elements)?,
        })
    }
}

#[derive(Clone)]
pub enum Problem {
    Bratu(BratuProblem),
    MongeAmpere(MongeAmpereProblem),
}

impl Problem {
    pub fn space(&self) -> &SplineSpace {
        match self {
            Problem::Bratu(b) => &b.space,
            Problem::MongeAmpere(m) => &m.space,
        }
    }

    fn exact(&self) -> Option<&ScalarFn> {
        match self {
            Problem::Bratu(b) => b.exact.as_ref(),
            Problem::MongeAmpere(m) => m.exact.as_ref(),
        }
    }
}

/// Linear solver applied inside each Picard step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerSolver {
    OneVCycle,
    VCycleToTol { tol: f64, maxiter: usize },
    /// Banded Cholesky of the fine operator.
    Direct,
}

/// Initial guess of the inner solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerStart {
    /// The interior part of the current Picard iterate.
    Previous,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualNorm {
    /// Euclidean norm of coefficient vectors.
    Euclidean,
    /// `sqrt(vᵀ M v)` with the mass matrix.
    Mass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterConfig {
    pub accelerator: Accelerator,
    pub tol: f64,
    pub maxiter: usize,
    pub inner: InnerSolver,
    pub inner_start: InnerStart,
    /// Full coefficient vector; zero interior plus boundary data when absent.
    pub initial_guess: Option<Vec<f64>>,
    pub residual_norm: ResidualNorm,
    pub smoother: SmootherConfig,
    pub coarsening: Coarsening,
    /// Interior functions per direction below which the coarsest level is solved directly.
    pub coarsest_size: usize,
}

impl OuterConfig {
    /// One warm-started V-cycle per step.
    pub fn bratu(accelerator: Accelerator, tol: f64, maxiter: usize) -> Self {
        Self {
            accelerator,
            tol,
            maxiter,
            inner: InnerSolver::OneVCycle,
            inner_start: InnerStart::Previous,
            initial_guess: None,
            residual_norm: ResidualNorm::Euclidean,
            smoother: SmootherConfig::default(),
            coarsening: Coarsening::Galerkin,
            coarsest_size: DIRECT_SOLVE_THRESHOLD,
        }
    }

    /// V-cycles from a zero guess until the linear tolerance is met.
    pub fn monge_ampere(accelerator: Accelerator, tol: f64, maxiter: usize, linear_tol: f64) -> Self {
        Self {
            inner: InnerSolver::VCycleToTol { tol: linear_tol, maxiter: 200 },
            inner_start: InnerStart::Zero,
            ..Self::bratu(accelerator, tol, maxiter)
        }
    }
}

enum Nonlinearity {
    Bratu { lambda: f64 },
    MongeAmpere,
}

/// The Picard map `U^n -> U^{n+1}` on full coefficient vectors.
pub struct PicardMap {
    kind: Nonlinearity,
    asm: Assembler,
    source: Vec<f64>,
    error_asm: Assembler,
    exact: Option<Vec<f64>>,
    layout: DirichletLayout,
    lifting: Vec<f64>,
    hierarchy: GridHierarchy,
    inner: InnerSolver,
    inner_start: InnerStart,
    smoother: SmootherConfig,
    direct: Option<BandCholesky>,
    mass: Option<SparseMatrix>,
    times: PhaseTimes,
    /// Inner solves that stopped before reaching their tolerance.
    pub inner_failures: usize,
    /// Largest share of quadrature points with a clamped Monge–Ampère radicand.
    pub max_clamped_fraction: f64,
}

impl PicardMap {
    pub fn new(problem: &Problem, cfg: &OuterConfig) -> Result<Self> {
        let hierarchy = GridHierarchy::with_threshold(problem.space(), cfg.coarsening, cfg.coarsest_size)?;
        Self::with_hierarchy(problem, hierarchy, cfg)
    }

    pub fn with_hierarchy(problem: &Problem, hierarchy: GridHierarchy, cfg: &OuterConfig) -> Result<Self> {
        let space = problem.space();
        let asm = Assembler::new(space)?;
        let error_asm = Assembler::with_extra_points(space, 1)?;
        let exact = problem.exact().map(|u| error_asm.sample(&**u));
        let (kind, source, layout) = match problem {
            Problem::Bratu(b) => {
                (Nonlinearity::Bratu { lambda: b.lambda }, asm.sample(&*b.source), apply_dirichlet(space, None)?)
            }
            Problem::MongeAmpere(m) => {
                (Nonlinearity::MongeAmpere, asm.sample(&*m.source), apply_dirichlet(space, Some(&*m.boundary))?)
            }
        };
        let lifting = if layout.is_homogeneous() {
            vec![0.0; layout.interior.len()]
        } else {
            layout.lifting(&asm.stiffness())
        };
        if hierarchy.fine_operator().rows() != layout.interior.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.interior.len(),
                found: hierarchy.fine_operator().rows(),
            });
        }
        let direct = match cfg.inner {
            InnerSolver::Direct => Some(BandCholesky::factor(hierarchy.fine_operator())?),
            _ => None,
        };
        let mass = match cfg.residual_norm {
            ResidualNorm::Mass => Some(asm.mass()),
            ResidualNorm::Euclidean => None,
        };
        Ok(Self {
            kind,
            asm,
            source,
            error_asm,
            exact,
            layout,
            lifting,
            hierarchy,
            inner: cfg.inner,
            inner_start: cfg.inner_start,
            smoother: cfg.smoother,
            direct,
            mass,
            times: PhaseTimes::default(),
            inner_failures: 0,
            max_clamped_fraction: 0.0,
        })
    }

    pub fn layout(&self) -> &DirichletLayout {
        &self.layout
    }

    pub fn hierarchy(&self) -> &GridHierarchy {
        &self.hierarchy
    }

    /// Zero interior coefficients for homogeneous data, otherwise the
    /// discrete harmonic extension of the boundary data.
    pub fn default_initial_guess(&self) -> Result<Vec<f64>> {
        if self.layout.is_homogeneous() {
            return Ok(self.layout.extend(&vec![0.0; self.layout.interior.len()]));
        }
        let interior = match &self.direct {
            Some(chol) => chol.solve(&self.lifting),
            None => BandCholesky::factor(self.hierarchy.fine_operator())?.solve(&self.lifting),
        };
        Ok(self.layout.extend(&interior))
    }

    /// L2 error against the sampled exact solution.
    pub fn error_of(&self, coefficients: &[f64]) -> Option<f64> {
        let exact = self.exact.as_ref()?;
        let vals = self.error_asm.field_values(coefficients, [0, 0]);
        let s: f64 = vals
            .iter()
            .zip(exact)
            .enumerate()
            .map(|(g, (v, e))| self.error_asm.weight(g) * (v - e) * (v - e))
            .sum();
        Some(s.sqrt())
    }
}

impl FixedPointMap for PicardMap {
    fn apply(&mut self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.layout.n_dof {
            return Err(Error::DimensionMismatch { expected: self.layout.n_dof, found: u.len() });
        }
        let t0 = Instant::now();
        let load = match self.kind {
            Nonlinearity::Bratu { lambda } => self.asm.bratu_rhs_from_source(&self.source, lambda, u)?,
            Nonlinearity::MongeAmpere => {
                let l = self.asm.monge_ampere_rhs_from_source(&self.source, u)?;
                self.max_clamped_fraction = self.max_clamped_fraction.max(l.clamped_fraction);
                l.load
            }
        };
        let mut b = self.layout.restrict(&load);
        for (bi, li) in b.iter_mut().zip(&self.lifting) {
            *bi += li;
        }
        let t1 = Instant::now();
        self.times.rhs_s += (t1 - t0).as_secs_f64();

        let x0 = match self.inner_start {
            InnerStart::Previous => self.layout.restrict(u),
            InnerStart::Zero => vec![0.0; b.len()],
        };
        let x = match self.inner {
            InnerSolver::OneVCycle => v_cycle(&self.hierarchy, &b, &x0, &self.smoother)?.0,
            InnerSolver::VCycleToTol { tol, maxiter } => {
                let (x, rep) = solve_to_tolerance(&self.hierarchy, &b, &x0, &self.smoother, tol, maxiter)?;
                if !rep.converged {
                    self.inner_failures += 1;
                }
                x
            }
            InnerSolver::Direct => self.direct.as_ref().unwrap().solve(&b),
        };
        self.times.mg_s += t1.elapsed().as_secs_f64();
        Ok(self.layout.extend(&x))
    }

    fn l2_error(&mut self, x: &[f64]) -> Option<f64> {
        self.error_of(x)
    }

    fn phase_times(&self) -> PhaseTimes {
        self.times
    }

    fn norm(&self, v: &[f64]) -> f64 {
        match &self.mass {
            Some(m) => dot(v, &m.matvec(v)).max(0.0).sqrt(),
            None => crate::linalg::norm2(v),
        }
    }
}

/// One Bratu Picard step from `u_n`.
pub fn bratu_picard_map(
    prob: &BratuProblem,
    hier: &GridHierarchy,
    u_n: &SplineField,
    inner: InnerSolver,
) -> Result<SplineField> {
    let cfg = OuterConfig { inner, ..OuterConfig::bratu(Accelerator::None, 1e-12, 1) };
    let mut map = PicardMap::with_hierarchy(&Problem::Bratu(prob.clone()), hier.clone(), &cfg)?;
    let c = map.apply(&u_n.coefficients).map_err(|e| match e {
        Error::Overflow { value } => Error::Diverged { residual: value },
        e => e,
    })?;
    SplineField::new(prob.space.clone(), c)
}

/// One Monge–Ampère Picard step from `u_n` with a cold-started inner solve.
pub fn monge_ampere_picard_map(
    prob: &MongeAmpereProblem,
    hier: &GridHierarchy,
    u_n: &SplineField,
    linear_tol: f64,
) -> Result<SplineField> {
    let cfg = OuterConfig::monge_ampere(Accelerator::None, 1e-10, 1, linear_tol);
    let mut map = PicardMap::with_hierarchy(&Problem::MongeAmpere(prob.clone()), hier.clone(), &cfg)?;
    let c = map.apply(&u_n.coefficients)?;
    SplineField::new(prob.space.clone(), c)
}

/// Result of an outer run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: SplineField,
    pub history: IterationHistory,
    pub status: SolveStatus,
    pub inner_failures: usize,
    pub max_clamped_fraction: f64,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn iterations(&self) -> usize {
        self.history.iterations()
    }

    pub fn relative_residual(&self) -> f64 {
        self.history.final_residual().unwrap_or(f64::NAN)
    }

    /// L2 error of the final iterate, if an exact solution is known.
    pub fn l2_error(&self) -> Option<f64> {
        self.history.last().and_then(|r| r.l2_error)
    }
}

/// Runs the accelerated Picard iteration for `problem`.
pub fn run_outer(problem: &Problem, cfg: &OuterConfig) -> Result<RunOutcome> {
    let mut map = PicardMap::new(problem, cfg)?;
    let x0 = match &cfg.initial_guess {
        Some(x) => x.clone(),
        None => map.default_initial_guess()?,
    };
    let out = solve_fixed_point(&mut map, &x0, cfg.accelerator, StopCriteria::new(cfg.tol, cfg.maxiter))?;
    Ok(RunOutcome {
        field: SplineField::new(problem.space().clone(), out.x)?,
        history: out.history,
        status: out.status,
        inner_failures: map.inner_failures,
        max_clamped_fraction: map.max_clamped_fraction,
    })
}
