//! Knot vectors, B-spline basis evaluation, Gauss–Legendre quadrature and
//! dyadic knot refinement.

use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};

/// Non-decreasing knot sequence of an open B-spline basis.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    /// Validates an open knot vector: non-decreasing, end knots repeated
    /// exactly `degree + 1` times.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnots(format!(
                "{} knots cannot hold an open basis of degree {degree}",
                knots.len()
            )));
        }
        if knots.iter().any(|t| !t.is_finite()) || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be finite and non-decreasing".into()));
        }
        let m = knots.len() - 1;
        let (a, b) = (knots[0], knots[m]);
        if a >= b {
            return Err(Error::InvalidInterval { a, b });
        }
        let lead = knots.iter().take_while(|&&t| t == a).count();
        let tail = knots.iter().rev().take_while(|&&t| t == b).count();
        if lead != degree + 1 || tail != degree + 1 {
            return Err(Error::InvalidKnots(format!(
                "end knots must be repeated exactly {} times",
                degree + 1
            )));
        }
        if knots.windows(degree + 2).any(|w| w[0] == w[degree + 1]) {
            return Err(Error::InvalidKnots("interior multiplicity exceeds the degree".into()));
        }
        Ok(Self { degree, knots })
    }

    /// Open knot vector with `n_elements` equal spans on `[a, b]`.
    pub fn open_uniform(degree: usize, n_elements: usize, a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        if n_elements == 0 {
            return Err(Error::InvalidKnots("at least one element is required".into()));
        }
        let mut knots = vec![a; degree + 1];
        let h = (b - a) / n_elements as f64;
        for i in 1..n_elements {
            knots.push(a + i as f64 * h);
        }
        knots.extend(std::iter::repeat(b).take(degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Distinct knot values, i.e. the element boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &t in &self.knots {
            if out.last() != Some(&t) {
                out.push(t);
            }
        }
        out
    }

    pub fn n_elements(&self) -> usize {
        self.breakpoints().len() - 1
    }

    /// Whether all elements have the same length (up to rounding).
    pub fn is_uniform(&self) -> bool {
        let bp = self.breakpoints();
        let h = (bp[bp.len() - 1] - bp[0]) / (bp.len() - 1) as f64;
        bp.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.max(1.0))
    }

    /// Knot index `j` with `t_j <= t < t_{j+1}`; the right endpoint belongs to
    /// the last non-empty span.
    pub fn find_span(&self, t: f64) -> Result<usize> {
        let (a, b) = self.domain();
        if !(t >= a && t <= b) {
            return Err(Error::OutOfDomain { t, a, b });
        }
        let n = self.n_basis();
        let p = self.degree;
        if t >= self.knots[n] {
            return Ok(n - 1);
        }
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(lo)
    }

    /// Greville abscissae, the averages of `p` consecutive interior knots.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return (0..self.n_basis()).map(|i| 0.5 * (self.knots[i] + self.knots[i + 1])).collect();
        }
        (0..self.n_basis())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }
}

/// Non-zero basis functions and derivatives at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEvaluation {
    /// Knot span index `j`; the active functions are `N_{j-p} .. N_j`.
    pub span: usize,
    /// `derivatives[k][a]` is the `k`-th derivative of `N_{j-p+a}`; `k = 0` holds values.
    pub derivatives: Vec<Vec<f64>>,
}

impl BasisEvaluation {
    pub fn first_index(&self) -> usize {
        self.span + 1 - self.derivatives[0].len()
    }

    pub fn values(&self) -> &[f64] {
        &self.derivatives[0]
    }

    pub fn derivative(&self, order: usize) -> &[f64] {
        &self.derivatives[order]
    }
}

/// Evaluates the `p + 1` non-zero basis functions at `t` together with their
/// derivatives up to `max_deriv` (orders above `p` are identically zero).
pub fn eval_basis(kv: &KnotVector, t: f64, max_deriv: usize) -> Result<BasisEvaluation> {
    let span = kv.find_span(t)?;
    Ok(BasisEvaluation { span, derivatives: ders_basis_funs(kv, span, t, max_deriv) })
}

pub(crate) fn ders_basis_funs(kv: &KnotVector, span: usize, t: f64, nd: usize) -> Vec<Vec<f64>> {
    let p = kv.degree;
    let u = &kv.knots;
    // ndu[j][r]: basis values (upper triangle incl. diagonal) and knot
    // differences (lower triangle).
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - u[span + 1 - j];
        right[j] = u[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = if ndu[j][r] == 0.0 { 0.0 } else { ndu[r][j - 1] / ndu[j][r] };
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let top = nd.min(p);
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0].iter_mut().for_each(|x| *x = 0.0);
        a[0][0] = 1.0;
        for k in 1..=top {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                let den = ndu[pk + 1][r - k];
                a[s2][0] = if den == 0.0 { 0.0 } else { a[s1][0] / den };
                d = a[s2][0] * ndu[r - k][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                let den = ndu[pk + 1][idx];
                a[s2][j] = if den == 0.0 { 0.0 } else { (a[s1][j] - a[s1][j - 1]) / den };
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                let den = ndu[pk + 1][r];
                a[s2][k] = if den == 0.0 { 0.0 } else { -a[s1][k - 1] / den };
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for k in 1..=top {
        for v in ders[k].iter_mut() {
            *v *= fac;
        }
        fac *= (p - k) as f64;
    }
    ders
}

/// Evaluates the spline `Σ c_i N_i(t)` (and optionally a derivative).
pub fn eval_spline(kv: &KnotVector, coefficients: &[f64], t: f64, order: usize) -> Result<f64> {
    let e = eval_basis(kv, t, order)?;
    let first = e.first_index();
    Ok(e.derivative(order).iter().enumerate().map(|(a, v)| v * coefficients[first + a]).sum())
}

/// Gauss–Legendre nodes and weights on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `n`-point Gauss–Legendre rule on `[a, b]`, exact up to degree `2n - 1`.
pub fn gauss_rule(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 || n > 16 {
        return Err(Error::UnsupportedOrder(n));
    }
    if !(a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(QuadratureRule {
        points: nodes.iter().map(|x| mid + half * x).collect(),
        weights: weights.iter().map(|w| w * half).collect(),
    })
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Two-scale relation between a knot vector and its dyadic refinement.
#[derive(Debug, Clone)]
pub struct RefinementMap {
    pub coarse: KnotVector,
    pub fine: KnotVector,
    /// Fine-by-coarse matrix mapping coarse coefficients to fine ones.
    pub matrix: SparseMatrix,
}

/// Inserts the midpoint of every non-empty span (Boehm knot insertion) and
/// returns the composed insertion matrix.
pub fn refine_dyadic(kv: &KnotVector) -> RefinementMap {
    let p = kv.degree;
    let n0 = kv.n_basis();
    let mids: Vec<f64> = kv.breakpoints().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

    let mut knots = kv.knots.clone();
    // rows of the current map, dense in the coarse index (coarse N is small)
    let mut rows: Vec<Vec<f64>> = (0..n0)
        .map(|i| {
            let mut r = vec![0.0; n0];
            r[i] = 1.0;
            r
        })
        .collect();
    for &t in &mids {
        let k = knots.partition_point(|&x| x <= t) - 1;
        let mut next = Vec::with_capacity(rows.len() + 1);
        for i in 0..=rows.len() {
            if i + p <= k {
                next.push(rows[i].clone());
            } else if i > k {
                next.push(rows[i - 1].clone());
            } else {
                let alpha = (t - knots[i]) / (knots[i + p] - knots[i]);
                let r: Vec<f64> = rows[i]
                    .iter()
                    .zip(&rows[i - 1])
                    .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                    .collect();
                next.push(r);
            }
        }
        knots.insert(k + 1, t);
        rows = next;
    }
    let fine = KnotVector::new(p, knots).expect("refinement keeps the knot vector open");
    let mut t = TripletBuilder::new(rows.len(), n0);
    for (i, r) in rows.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if v != 0.0 {
                t.push(i, j, v);
            }
        }
    }
    RefinementMap { coarse: kv.clone(), fine, matrix: t.build() }
}
