//! Galerkin assembly on tensor-product B-spline spaces in one and two
//! dimensions.
//!
//! Degrees of freedom of a 2D space are numbered `ix * ny + iy`. Assembly
//! uses `p + 1` Gauss points per span and direction; error norms use `p + 2`.
//! Two-dimensional loads and field evaluations at quadrature points are
//! sum-factorised direction by direction.

use crate::bspline::{ders_basis_funs, eval_basis, gauss_rule, KnotVector};
use crate::error::{Error, Result};
use crate::linalg::{dot, BandCholesky, DenseMatrix, LuFactors, SparseMatrix};

/// Scalar function of a point given as a slice of coordinates.
pub type PointFn<'a> = &'a dyn Fn(&[f64]) -> f64;

#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace {
    bases: Vec<KnotVector>,
}

impl SplineSpace {
    pub fn new(bases: Vec<KnotVector>) -> Result<Self> {
        if bases.is_empty() || bases.len() > 2 {
            return Err(Error::Config(format!("{} directions requested, 1 or 2 supported", bases.len())));
        }
        Ok(Self { bases })
    }

    /// Uniform space of degree `p` with `n_elements` spans per direction on
    /// the unit interval or square.
    pub fn unit(dims: usize, p: usize, n_elements: usize) -> Result<Self> {
        let kv = KnotVector::open_uniform(p, n_elements, 0.0, 1.0)?;
        Self::new(vec![kv; dims])
    }

    pub fn dims(&self) -> usize {
        self.bases.len()
    }

    pub fn basis(&self, d: usize) -> &KnotVector {
        &self.bases[d]
    }

    pub fn bases(&self) -> &[KnotVector] {
        &self.bases
    }

    pub fn n_per_dir(&self, d: usize) -> usize {
        self.bases[d].n_basis()
    }

    pub fn n_dof(&self) -> usize {
        self.bases.iter().map(|b| b.n_basis()).product()
    }

    /// Smallest degree over the directions.
    pub fn degree(&self) -> usize {
        self.bases.iter().map(|b| b.degree()).min().unwrap()
    }

    pub fn n_elements(&self, d: usize) -> usize {
        self.bases[d].n_elements()
    }

    /// The space with half as many uniform elements per direction.
    pub fn coarsened(&self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.dims());
        for kv in &self.bases {
            let n = kv.n_elements();
            if n % 2 != 0 || n < 2 {
                return Err(Error::TooCoarse(format!("{n} elements cannot be halved")));
            }
            if !kv.is_uniform() {
                return Err(Error::TooCoarse("only uniform knot vectors can be coarsened".into()));
            }
            let (a, b) = kv.domain();
            out.push(KnotVector::open_uniform(kv.degree(), n / 2, a, b)?);
        }
        Self::new(out)
    }

    pub fn is_boundary(&self, index: usize) -> bool {
        match self.dims() {
            1 => index == 0 || index + 1 == self.n_dof(),
            _ => {
                let ny = self.n_per_dir(1);
                let (ix, iy) = (index / ny, index % ny);
                ix == 0 || iy == 0 || ix + 1 == self.n_per_dir(0) || iy + 1 == ny
            }
        }
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.n_dof()).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn boundary_indices(&self) -> Vec<usize> {
        (0..self.n_dof()).filter(|&i| self.is_boundary(i)).collect()
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), found: point.len() });
        }
        Ok(())
    }
}

/// A spline function: a space plus one coefficient per basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineField {
    pub space: SplineSpace,
    pub coefficients: Vec<f64>,
}

impl SplineField {
    pub fn new(space: SplineSpace, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.n_dof() {
            return Err(Error::DimensionMismatch { expected: space.n_dof(), found: coefficients.len() });
        }
        Ok(Self { space, coefficients })
    }

    pub fn zeros(space: SplineSpace) -> Self {
        let n = space.n_dof();
        Self { space, coefficients: vec![0.0; n] }
    }
}

/// Value, gradient and Hessian (row-major, `dims x dims`) at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValue {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<f64>,
}

/// Basis data at every quadrature point of one direction.
#[derive(Debug, Clone)]
pub(crate) struct Tabulation {
    pub p: usize,
    pub nq: usize,
    pub n_basis: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub first: Vec<usize>,
    /// `ders[k][g * (p + 1) + a]`, `k = 0, 1, 2`
    pub ders: [Vec<f64>; 3],
}

impl Tabulation {
    pub fn new(kv: &KnotVector, nq: usize) -> Result<Self> {
        let p = kv.degree();
        let bp = kv.breakpoints();
        let ne = bp.len() - 1;
        let npts = ne * nq;
        let mut t = Tabulation {
            p,
            nq,
            n_basis: kv.n_basis(),
            points: Vec::with_capacity(npts),
            weights: Vec::with_capacity(npts),
            first: Vec::with_capacity(npts),
            ders: [Vec::with_capacity(npts * (p + 1)), Vec::with_capacity(npts * (p + 1)), Vec::with_capacity(npts * (p + 1))],
        };
        for w in bp.windows(2) {
            let rule = gauss_rule(nq, w[0], w[1])?;
            let span = kv.find_span(0.5 * (w[0] + w[1]))?;
            for (&x, &wt) in rule.points.iter().zip(&rule.weights) {
                let d = ders_basis_funs(kv, span, x, 2);
                t.points.push(x);
                t.weights.push(wt);
                t.first.push(span - p);
                for k in 0..3 {
                    t.ders[k].extend_from_slice(&d[k]);
                }
            }
        }
        Ok(t)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_elements(&self) -> usize {
        self.points.len() / self.nq
    }

    #[inline]
    pub fn basis(&self, k: usize, g: usize) -> &[f64] {
        let w = self.p + 1;
        &self.ders[k][g * w..(g + 1) * w]
    }

    /// Local `(p+1) x (p+1)` stiffness and mass blocks of element `e`
    /// (row-major) and the first active index.
    fn element_blocks(&self, e: usize) -> (Vec<f64>, Vec<f64>, usize) {
        let w = self.p + 1;
        let mut k = vec![0.0; w * w];
        let mut m = vec![0.0; w * w];
        for g in e * self.nq..(e + 1) * self.nq {
            let (b0, b1, wt) = (self.basis(0, g), self.basis(1, g), self.weights[g]);
            for a in 0..w {
                for b in 0..w {
                    k[a * w + b] += wt * b1[a] * b1[b];
                    m[a * w + b] += wt * b0[a] * b0[b];
                }
            }
        }
        (k, m, self.first[e * self.nq])
    }
}

/// Quadrature data for a space, cached across repeated assemblies.
#[derive(Debug, Clone)]
pub struct Assembler {
    space: SplineSpace,
    tabs: Vec<Tabulation>,
}

fn band_pattern(n: usize, p: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| (i.saturating_sub(p)..(i + p + 1).min(n)).collect()).collect()
}

fn tensor_pattern(nx: usize, px: usize, ny: usize, py: usize) -> Vec<Vec<usize>> {
    let mut rows = Vec::with_capacity(nx * ny);
    for ix in 0..nx {
        for iy in 0..ny {
            let mut r = Vec::new();
            for jx in ix.saturating_sub(px)..(ix + px + 1).min(nx) {
                for jy in iy.saturating_sub(py)..(iy + py + 1).min(ny) {
                    r.push(jx * ny + jy);
                }
            }
            rows.push(r);
        }
    }
    rows
}

#[derive(Clone, Copy, PartialEq)]
enum Form {
    Stiffness,
    Mass,
}

impl Assembler {
    pub fn new(space: &SplineSpace) -> Result<Self> {
        Self::with_extra_points(space, 0)
    }

    /// Uses `p + 1 + extra` points per span and direction.
    pub fn with_extra_points(space: &SplineSpace, extra: usize) -> Result<Self> {
        let tabs = space
            .bases()
            .iter()
            .map(|kv| Tabulation::new(kv, kv.degree() + 1 + extra))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { space: space.clone(), tabs })
    }

    pub fn space(&self) -> &SplineSpace {
        &self.space
    }

    /// Number of quadrature points in the tensor grid.
    pub fn n_points(&self) -> usize {
        self.tabs.iter().map(|t| t.n_points()).product()
    }

    /// Coordinates of quadrature point `g` (same ordering as the value grids).
    pub fn point(&self, g: usize) -> Vec<f64> {
        match self.tabs.len() {
            1 => vec![self.tabs[0].points[g]],
            _ => {
                let nqy = self.tabs[1].n_points();
                vec![self.tabs[0].points[g / nqy], self.tabs[1].points[g % nqy]]
            }
        }
    }

    pub fn weight(&self, g: usize) -> f64 {
        match self.tabs.len() {
            1 => self.tabs[0].weights[g],
            _ => {
                let nqy = self.tabs[1].n_points();
                self.tabs[0].weights[g / nqy] * self.tabs[1].weights[g % nqy]
            }
        }
    }

    /// Samples a function at every quadrature point.
    pub fn sample(&self, f: PointFn) -> Vec<f64> {
        (0..self.n_points()).map(|g| f(&self.point(g))).collect()
    }

    fn assemble(&self, form: Form) -> SparseMatrix {
        match self.tabs.len() {
            1 => {
                let t = &self.tabs[0];
                let w = t.p + 1;
                let mut a = SparseMatrix::from_pattern(t.n_basis, band_pattern(t.n_basis, t.p));
                for e in 0..t.n_elements() {
                    let (k, m, f) = t.element_blocks(e);
                    let loc = if form == Form::Stiffness { k } else { m };
                    for i in 0..w {
                        for j in 0..w {
                            a.add_to(f + i, f + j, loc[i * w + j]);
                        }
                    }
                }
                a
            }
            _ => {
                let (tx, ty) = (&self.tabs[0], &self.tabs[1]);
                let (nx, ny) = (tx.n_basis, ty.n_basis);
                let (wx, wy) = (tx.p + 1, ty.p + 1);
                let mut a = SparseMatrix::from_pattern(nx * ny, tensor_pattern(nx, tx.p, ny, ty.p));
                let ey: Vec<_> = (0..ty.n_elements()).map(|e| ty.element_blocks(e)).collect();
                for ex in 0..tx.n_elements() {
                    let (kx, mx, fx) = tx.element_blocks(ex);
                    for (ky, my, fy) in &ey {
                        for a1 in 0..wx {
                            for a2 in 0..wy {
                                let row = (fx + a1) * ny + fy + a2;
                                for b1 in 0..wx {
                                    let (k1, m1) = (kx[a1 * wx + b1], mx[a1 * wx + b1]);
                                    for b2 in 0..wy {
                                        let v = match form {
                                            Form::Stiffness => k1 * my[a2 * wy + b2] + m1 * ky[a2 * wy + b2],
                                            Form::Mass => m1 * my[a2 * wy + b2],
                                        };
                                        a.add_to(row, (fx + b1) * ny + fy + b2, v);
                                    }
                                }
                            }
                        }
                    }
                }
                a
            }
        }
    }

    /// `K_ij = ∫ ∇B_i · ∇B_j` over all degrees of freedom.
    pub fn stiffness(&self) -> SparseMatrix {
        self.assemble(Form::Stiffness)
    }

    /// `M_ij = ∫ B_i B_j` over all degrees of freedom.
    pub fn mass(&self) -> SparseMatrix {
        self.assemble(Form::Mass)
    }

    /// Values of `∂^dx_x ∂^dy_y u` on the quadrature grid.
    pub fn field_values(&self, coefficients: &[f64], deriv: [usize; 2]) -> Vec<f64> {
        match self.tabs.len() {
            1 => {
                let t = &self.tabs[0];
                (0..t.n_points())
                    .map(|g| {
                        let f = t.first[g];
                        dot(t.basis(deriv[0], g), &coefficients[f..f + t.p + 1])
                    })
                    .collect()
            }
            _ => {
                let (tx, ty) = (&self.tabs[0], &self.tabs[1]);
                let (nx, ny) = (tx.n_basis, ty.n_basis);
                let (nqx, nqy) = (tx.n_points(), ty.n_points());
                // contract the y direction first
                let mut tmp = vec![0.0; nx * nqy];
                for ix in 0..nx {
                    let row = &coefficients[ix * ny..(ix + 1) * ny];
                    for gy in 0..nqy {
                        let f = ty.first[gy];
                        tmp[ix * nqy + gy] = dot(ty.basis(deriv[1], gy), &row[f..f + ty.p + 1]);
                    }
                }
                let mut out = vec![0.0; nqx * nqy];
                for gx in 0..nqx {
                    let f = tx.first[gx];
                    let bx = tx.basis(deriv[0], gx);
                    let dst = &mut out[gx * nqy..(gx + 1) * nqy];
                    for (a, &b) in bx.iter().enumerate() {
                        let src = &tmp[(f + a) * nqy..(f + a + 1) * nqy];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += b * s;
                        }
                    }
                }
                out
            }
        }
    }

    /// `F_i = Σ_g w_g B_i(x_g) v_g`, the quadrature of `∫ v B_i`.
    pub fn integrate_basis(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.n_points());
        match self.tabs.len() {
            1 => {
                let t = &self.tabs[0];
                let mut out = vec![0.0; t.n_basis];
                for g in 0..t.n_points() {
                    let f = t.first[g];
                    let s = t.weights[g] * values[g];
                    for (a, &b) in t.basis(0, g).iter().enumerate() {
                        out[f + a] += s * b;
                    }
                }
                out
            }
            _ => {
                let (tx, ty) = (&self.tabs[0], &self.tabs[1]);
                let (nx, ny) = (tx.n_basis, ty.n_basis);
                let (nqx, nqy) = (tx.n_points(), ty.n_points());
                let mut tmp = vec![0.0; nqx * ny];
                for gx in 0..nqx {
                    let dst = &mut tmp[gx * ny..(gx + 1) * ny];
                    for gy in 0..nqy {
                        let s = ty.weights[gy] * values[gx * nqy + gy];
                        let f = ty.first[gy];
                        for (a, &b) in ty.basis(0, gy).iter().enumerate() {
                            dst[f + a] += s * b;
                        }
                    }
                }
                let mut out = vec![0.0; nx * ny];
                for gx in 0..nqx {
                    let f = tx.first[gx];
                    let src = &tmp[gx * ny..(gx + 1) * ny];
                    for (a, &b) in tx.basis(0, gx).iter().enumerate() {
                        let s = tx.weights[gx] * b;
                        let dst = &mut out[(f + a) * ny..(f + a + 1) * ny];
                        for (d, v) in dst.iter_mut().zip(src) {
                            *d += s * v;
                        }
                    }
                }
                out
            }
        }
    }

    /// `∫ f B_i` for every basis function.
    pub fn load(&self, f: PointFn) -> Vec<f64> {
        self.integrate_basis(&self.sample(f))
    }

    /// Bratu load `∫ (f - λ e^u) B_i` with `f` given at the quadrature points.
    pub fn bratu_rhs_from_source(&self, source: &[f64], lambda: f64, u: &[f64]) -> Result<Vec<f64>> {
        let mut vals = self.field_values(u, [0, 0]);
        for (v, &f) in vals.iter_mut().zip(source) {
            if !(*v <= EXP_LIMIT) {
                return Err(Error::Overflow { value: *v });
            }
            *v = if lambda == 0.0 { f } else { f - lambda * v.exp() };
        }
        Ok(self.integrate_basis(&vals))
    }

    /// Monge–Ampère load `-∫ G(u) B_i` with `f` given at the quadrature points.
    pub fn monge_ampere_rhs_from_source(&self, source: &[f64], u: &[f64]) -> Result<MongeAmpereLoad> {
        if self.space.dims() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.space.dims() });
        }
        if self.space.degree() < 2 {
            return Err(Error::DegreeTooLow { degree: self.space.degree(), required: 2 });
        }
        let uxx = self.field_values(u, [2, 0]);
        let uyy = self.field_values(u, [0, 2]);
        let uxy = self.field_values(u, [1, 1]);
        let mut clamped = 0usize;
        let mut g = vec![0.0; uxx.len()];
        for i in 0..g.len() {
            let lap = uxx[i] + uyy[i];
            let det = uxx[i] * uyy[i] - uxy[i] * uxy[i];
            let rad = lap * lap + 2.0 * (source[i] - det);
            if !rad.is_finite() {
                return Err(Error::Overflow { value: rad });
            }
            if rad < 0.0 {
                clamped += 1;
            }
            g[i] = -rad.max(0.0).sqrt();
        }
        Ok(MongeAmpereLoad {
            load: self.integrate_basis(&g),
            clamped_fraction: clamped as f64 / g.len() as f64,
        })
    }

    /// `sqrt(∫ (u_h - u)^2)` with this assembler's quadrature.
    pub fn l2_error(&self, coefficients: &[f64], exact: PointFn) -> f64 {
        let vals = self.field_values(coefficients, [0, 0]);
        let s: f64 = vals
            .iter()
            .enumerate()
            .map(|(g, v)| {
                let d = v - exact(&self.point(g));
                self.weight(g) * d * d
            })
            .sum();
        s.sqrt()
    }
}

/// Arguments above this value make `exp` overflow-prone and are rejected.
pub const EXP_LIMIT: f64 = 700.0;

/// Monge–Ampère load vector plus the share of quadrature points where the
/// radicand was clamped at zero.
#[derive(Debug, Clone)]
pub struct MongeAmpereLoad {
    pub load: Vec<f64>,
    pub clamped_fraction: f64,
}

impl MongeAmpereLoad {
    /// Clamping on more than 1% of the points is worth reporting.
    pub fn clamping_significant(&self) -> bool {
        self.clamped_fraction > 0.01
    }
}

pub fn assemble_stiffness(space: &SplineSpace) -> SparseMatrix {
    Assembler::new(space).expect("degree within quadrature range").stiffness()
}

pub fn assemble_mass(space: &SplineSpace) -> SparseMatrix {
    Assembler::new(space).expect("degree within quadrature range").mass()
}

/// Full-length Bratu load vector `∫ (f - λ e^{u_prev}) B_i`.
pub fn assemble_bratu_rhs(space: &SplineSpace, lambda: f64, f: PointFn, u_prev: &SplineField) -> Result<Vec<f64>> {
    let asm = Assembler::new(space)?;
    asm.bratu_rhs_from_source(&asm.sample(f), lambda, &u_prev.coefficients)
}

/// Full-length Monge–Ampère load vector `-∫ G(u_prev) B_i`.
pub fn assemble_monge_ampere_rhs(space: &SplineSpace, f: PointFn, u_prev: &SplineField) -> Result<MongeAmpereLoad> {
    let asm = Assembler::new(space)?;
    asm.monge_ampere_rhs_from_source(&asm.sample(f), &u_prev.coefficients)
}

/// Evaluates a field with its gradient and Hessian at a point.
pub fn eval_field(field: &SplineField, point: &[f64]) -> Result<FieldValue> {
    let space = &field.space;
    space.check_point(point)?;
    let c = &field.coefficients;
    match space.dims() {
        1 => {
            let e = eval_basis(space.basis(0), point[0], 2)?;
            let f = e.first_index();
            let w = e.values().len();
            let s = |k: usize| dot(e.derivative(k), &c[f..f + w]);
            Ok(FieldValue { value: s(0), gradient: vec![s(1)], hessian: vec![s(2)] })
        }
        _ => {
            let ex = eval_basis(space.basis(0), point[0], 2)?;
            let ey = eval_basis(space.basis(1), point[1], 2)?;
            let ny = space.n_per_dir(1);
            let (fx, fy) = (ex.first_index(), ey.first_index());
            let s = |kx: usize, ky: usize| {
                let mut acc = 0.0;
                for (a, bx) in ex.derivative(kx).iter().enumerate() {
                    for (b, by) in ey.derivative(ky).iter().enumerate() {
                        acc += bx * by * c[(fx + a) * ny + fy + b];
                    }
                }
                acc
            };
            let uxy = s(1, 1);
            Ok(FieldValue {
                value: s(0, 0),
                gradient: vec![s(1, 0), s(0, 1)],
                hessian: vec![s(2, 0), uxy, uxy, s(0, 2)],
            })
        }
    }
}

/// `sqrt(∫ (u_h - u)^2)` using `p + 2` Gauss points per span.
pub fn l2_error(field: &SplineField, exact: PointFn) -> f64 {
    Assembler::with_extra_points(&field.space, 1)
        .expect("degree within quadrature range")
        .l2_error(&field.coefficients, exact)
}

/// L2 projection of `f` onto the full space (no boundary constraints).
pub fn l2_projection(space: &SplineSpace, f: PointFn) -> Result<SplineField> {
    let asm = Assembler::with_extra_points(space, 2)?;
    let chol = BandCholesky::factor(&asm.mass())?;
    let c = chol.solve(&asm.load(f));
    SplineField::new(space.clone(), c)
}

/// `sqrt(vᵀ M v)`.
pub fn mass_norm(mass: &SparseMatrix, v: &[f64]) -> f64 {
    dot(v, &mass.matvec(v)).max(0.0).sqrt()
}

/// Interior/boundary partition of the degrees of freedom plus the fixed
/// boundary coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletLayout {
    pub n_dof: usize,
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
    pub boundary_values: Vec<f64>,
}

impl DirichletLayout {
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| full[i]).collect()
    }

    /// Full coefficient vector from interior values and the boundary data.
    pub fn extend(&self, interior: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dof];
        for (&i, &v) in self.interior.iter().zip(interior) {
            out[i] = v;
        }
        for (&i, &v) in self.boundary.iter().zip(&self.boundary_values) {
            out[i] = v;
        }
        out
    }

    pub fn is_homogeneous(&self) -> bool {
        self.boundary_values.iter().all(|&v| v == 0.0)
    }

    /// `-A_IB g_B` for a full-space operator `a`.
    pub fn lifting(&self, a: &SparseMatrix) -> Vec<f64> {
        let mut g = vec![0.0; self.n_dof];
        for (&i, &v) in self.boundary.iter().zip(&self.boundary_values) {
            g[i] = v;
        }
        let ag = a.matvec(&g);
        self.interior.iter().map(|&i| -ag[i]).collect()
    }
}

fn interpolate_1d(kv: &KnotVector, g: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    let xs = kv.greville();
    let n = xs.len();
    let mut a = DenseMatrix::zeros(n, n);
    for (i, &x) in xs.iter().enumerate() {
        let e = eval_basis(kv, x, 0)?;
        for (k, &v) in e.values().iter().enumerate() {
            a.set(i, e.first_index() + k, v);
        }
    }
    let rhs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    Ok(LuFactors::factor(&a)?.solve(&rhs))
}

/// Boundary layout: zero data when `g` is `None`, otherwise boundary
/// coefficients interpolating `g` at the Greville points of each edge.
pub fn apply_dirichlet(space: &SplineSpace, g: Option<PointFn>) -> Result<DirichletLayout> {
    let interior = space.interior_indices();
    let boundary = space.boundary_indices();
    let n_dof = space.n_dof();
    let mut full = vec![0.0; n_dof];
    if let Some(g) = g {
        match space.dims() {
            1 => {
                let (a, b) = space.basis(0).domain();
                full[0] = g(&[a]);
                full[n_dof - 1] = g(&[b]);
            }
            _ => {
                let (kx, ky) = (space.basis(0), space.basis(1));
                let (nx, ny) = (kx.n_basis(), ky.n_basis());
                let (ax, bx) = kx.domain();
                let (ay, by) = ky.domain();
                let bottom = interpolate_1d(kx, &|x| g(&[x, ay]))?;
                let top = interpolate_1d(kx, &|x| g(&[x, by]))?;
                let left = interpolate_1d(ky, &|y| g(&[ax, y]))?;
                let right = interpolate_1d(ky, &|y| g(&[bx, y]))?;
                for ix in 0..nx {
                    full[ix * ny] = bottom[ix];
                    full[ix * ny + ny - 1] = top[ix];
                }
                for iy in 0..ny {
                    full[iy] = left[iy];
                    full[(nx - 1) * ny + iy] = right[iy];
                }
            }
        }
    }
    let boundary_values = boundary.iter().map(|&i| full[i]).collect();
    Ok(DirichletLayout { n_dof, interior, boundary, boundary_values })
}
