//! Tubal vectors and tubal matrices over `K_p(L)`.
//!
//! A [`TubalMatrix`] stores an `m×n×p` real tensor tube-major: entry
//! `a_ij(k)` lives at `(i·n + j)·p + k`. Products go through the transform
//! domain, where `Φ_L(A *_L B)(k) = Φ_L(A)(k) · Φ_L(B)(k)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TubalError};
use crate::scalar::{self, TubalScalar, REALNESS_TOL};
use crate::transform::Transform;

pub type CMat = DMatrix<Complex64>;

/// Default orthogonality tolerance is `ORTHOGONALITY_TOL · √n`.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TubalMatrix {
    m: usize,
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl TubalMatrix {
    pub fn zeros(m: usize, n: usize, p: usize) -> Self {
        TubalMatrix { m, n, p, data: vec![0.0; m * n * p] }
    }

    /// Wraps a tube-major buffer (`i` outer, `j` middle, `k` inner).
    pub fn from_data(m: usize, n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 || p == 0 {
            return Err(TubalError::InvalidDimension(format!("tensor shape {m}x{n}x{p}")));
        }
        if data.len() != m * n * p {
            return Err(TubalError::DimensionMismatch {
                context: "tensor data length",
                expected: m * n * p,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(TubalError::InvalidDimension("tensor has non-finite entries".into()));
        }
        Ok(TubalMatrix { m, n, p, data })
    }

    pub fn from_fn(m: usize, n: usize, p: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(m * n * p);
        for i in 0..m {
            for j in 0..n {
                for k in 0..p {
                    data.push(f(i, j, k));
                }
            }
        }
        TubalMatrix { m, n, p, data }
    }

    /// Diagonal tubal matrix with the given diagonal tubes.
    pub fn diagonal(m: usize, n: usize, p: usize, tubes: &[TubalScalar]) -> Self {
        let mut out = Self::zeros(m, n, p);
        for (l, t) in tubes.iter().enumerate().take(m.min(n)) {
            out.tube_mut(l, l).copy_from_slice(t.as_slice());
        }
        out
    }

    /// Entries drawn i.i.d. from the standard normal distribution.
    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, p: usize, rng: &mut R) -> Self {
        let data = (0..m * n * p).map(|_| StandardNormal.sample(rng)).collect();
        TubalMatrix { m, n, p, data }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.m, self.n, self.p)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn tube_len(&self) -> usize {
        self.p
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.p + k]
    }

    pub fn tube(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.n + j) * self.p;
        &self.data[start..start + self.p]
    }

    pub fn tube_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let start = (i * self.n + j) * self.p;
        &mut self.data[start..start + self.p]
    }

    pub fn entry(&self, i: usize, j: usize) -> TubalScalar {
        TubalScalar::from(self.tube(i, j))
    }

    pub fn row(&self, i: usize) -> TubalVector {
        let mut data = Vec::with_capacity(self.n * self.p);
        for j in 0..self.n {
            data.extend_from_slice(self.tube(i, j));
        }
        TubalVector { n: self.n, p: self.p, data }
    }

    pub fn column(&self, j: usize) -> TubalVector {
        let mut data = Vec::with_capacity(self.m * self.p);
        for i in 0..self.m {
            data.extend_from_slice(self.tube(i, j));
        }
        TubalVector { n: self.m, p: self.p, data }
    }

    /// Frobenius norm, accumulated in storage order.
    pub fn frobenius(&self) -> f64 {
        frobenius(self)
    }

    pub fn scale(&self, s: f64) -> Self {
        TubalMatrix { data: self.data.iter().map(|x| x * s).collect(), ..*self }
    }

    fn check_same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(TubalError::DimensionMismatch {
                context,
                expected: self.data.len(),
                found: other.data.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "tubal matrix addition")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(TubalMatrix { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "tubal matrix subtraction")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(TubalMatrix { data, ..*self })
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.frobenius())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }
}

/// A length-`n` column of tubal scalars, stored tube-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TubalVector {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl TubalVector {
    pub fn from_entries(entries: &[TubalScalar]) -> Result<Self> {
        let p = entries.first().map_or(0, TubalScalar::len);
        if entries.is_empty() || p == 0 {
            return Err(TubalError::InvalidDimension("empty tubal vector".into()));
        }
        let mut data = Vec::with_capacity(entries.len() * p);
        for e in entries {
            if e.len() != p {
                return Err(TubalError::DimensionMismatch {
                    context: "tubal vector entry",
                    expected: p,
                    found: e.len(),
                });
            }
            data.extend_from_slice(e.as_slice());
        }
        Ok(TubalVector { n: entries.len(), p, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn tube_len(&self) -> usize {
        self.p
    }

    pub fn entry(&self, i: usize) -> TubalScalar {
        TubalScalar::from(&self.data[i * self.p..(i + 1) * self.p])
    }

    /// The `n×1` tubal matrix with this vector as its column.
    pub fn to_matrix(&self) -> TubalMatrix {
        TubalMatrix { m: self.n, n: 1, p: self.p, data: self.data.clone() }
    }

    /// `Xᵀ *_L Y = Σ_k x_kᵀ ⊙_L y_k`.
    pub fn inner(&self, l: &Transform, other: &TubalVector) -> Result<TubalScalar> {
        if self.n != other.n {
            return Err(TubalError::DimensionMismatch {
                context: "tubal inner product",
                expected: self.n,
                found: other.n,
            });
        }
        let mut acc = TubalScalar::zeros(self.p);
        for k in 0..self.n {
            let xt = scalar::transpose_scalar(l, &self.entry(k))?;
            acc = &acc + &scalar::tprod(l, &xt, &other.entry(k))?;
        }
        Ok(acc)
    }

    /// `Xᵀ *_L X = e_L` within `tol` (max-abs).
    pub fn is_normalized(&self, l: &Transform, tol: f64) -> Result<bool> {
        let e = scalar::unit(l)?;
        Ok(self.inner(l, self)?.max_abs_diff(&e) <= tol)
    }

    /// `Xᵀ *_L Y = 0` within `tol` (max-abs).
    pub fn is_orthogonal_to(&self, l: &Transform, other: &TubalVector, tol: f64) -> Result<bool> {
        let ip = self.inner(l, other)?;
        Ok(ip.as_slice().iter().all(|x| x.abs() <= tol))
    }
}

/// Stacks the `k`-th components of all entries: block `k` is `(x_1(k), …, x_n(k))`.
pub fn unfold(x: &TubalVector) -> Vec<f64> {
    let mut out = vec![0.0; x.n * x.p];
    for i in 0..x.n {
        for k in 0..x.p {
            out[k * x.n + i] = x.data[i * x.p + k];
        }
    }
    out
}

/// Inverse of [`unfold`].
pub fn fold(v: &[f64], n: usize, p: usize) -> Result<TubalVector> {
    if n == 0 || p == 0 {
        return Err(TubalError::InvalidDimension(format!("fold into n={n}, p={p}")));
    }
    if v.len() != n * p {
        return Err(TubalError::DimensionMismatch { context: "fold", expected: n * p, found: v.len() });
    }
    let mut data = vec![0.0; n * p];
    for k in 0..p {
        for i in 0..n {
            data[i * p + k] = v[k * n + i];
        }
    }
    Ok(TubalVector { n, p, data })
}

fn check_p(l: &Transform, a: &TubalMatrix) -> Result<()> {
    if a.p != l.p() {
        return Err(TubalError::DimensionMismatch {
            context: "tube length vs transform size",
            expected: l.p(),
            found: a.p,
        });
    }
    Ok(())
}

/// Transform-domain slices `Φ_L(A)(k)`, `k = 0..p`.
pub fn slices(l: &Transform, a: &TubalMatrix) -> Result<Vec<CMat>> {
    check_p(l, a)?;
    let (m, n, p) = a.shape();
    // Tubes as columns of a p × mn matrix, then one product with L.
    let tubes = CMat::from_fn(p, m * n, |k, c| Complex64::new(a.data[c * p + k], 0.0));
    let fwd = l.matrix() * tubes;
    Ok((0..p)
        .map(|k| CMat::from_fn(m, n, |i, j| fwd[(k, i * n + j)]))
        .collect())
}

/// Inverse of [`slices`]. Returns the real tensor and the largest discarded
/// imaginary part.
pub fn from_slices(l: &Transform, sl: &[CMat]) -> Result<(TubalMatrix, f64)> {
    let p = l.p();
    if sl.len() != p {
        return Err(TubalError::DimensionMismatch { context: "slice count", expected: p, found: sl.len() });
    }
    let (m, n) = sl[0].shape();
    if m == 0 || n == 0 {
        return Err(TubalError::InvalidDimension("empty slices".into()));
    }
    for s in sl {
        if s.shape() != (m, n) {
            return Err(TubalError::DimensionMismatch {
                context: "slice shape",
                expected: m * n,
                found: s.nrows() * s.ncols(),
            });
        }
    }
    let stacked = CMat::from_fn(p, m * n, |k, c| sl[k][(c / n, c % n)]);
    let back = l.inverse_matrix() * stacked;
    let mut data = vec![0.0; m * n * p];
    let mut residual: f64 = 0.0;
    for c in 0..m * n {
        for k in 0..p {
            let z = back[(k, c)];
            data[c * p + k] = z.re;
            residual = residual.max(z.im.abs());
        }
    }
    Ok((TubalMatrix { m, n, p, data }, residual))
}

/// Like [`from_slices`] but fails when the imaginary residual exceeds `tolerance`.
pub(crate) fn from_slices_checked(l: &Transform, sl: &[CMat], tolerance: f64) -> Result<TubalMatrix> {
    let (t, residual) = from_slices(l, sl)?;
    if residual > tolerance || !residual.is_finite() {
        return Err(TubalError::RealnessViolation { residual, tolerance, value: None });
    }
    Ok(t)
}

/// `A *_L B`, computed slice-wise in the transform domain.
pub fn mat_tprod(l: &Transform, a: &TubalMatrix, b: &TubalMatrix) -> Result<TubalMatrix> {
    l.require_real_preserving()?;
    check_p(l, a)?;
    check_p(l, b)?;
    if a.n != b.m {
        return Err(TubalError::DimensionMismatch { context: "*_L inner dimension", expected: a.n, found: b.m });
    }
    let sa = slices(l, a)?;
    let sb = slices(l, b)?;
    let sc: Vec<CMat> = sa.iter().zip(&sb).map(|(x, y)| x * y).collect();
    let tolerance = REALNESS_TOL * (a.frobenius() * b.frobenius() + 1.0);
    from_slices_checked(l, &sc, tolerance)
}

/// `Aᵀ` with `b_ij = a_jiᵀ`.
pub fn mat_transpose(l: &Transform, a: &TubalMatrix) -> Result<TubalMatrix> {
    check_p(l, a)?;
    let psi = l.require_doubly_real_preserving()?;
    let mut out = TubalMatrix::zeros(a.n, a.m, a.p);
    for i in 0..a.m {
        for j in 0..a.n {
            let t = scalar::apply_real(psi, a.tube(i, j));
            out.tube_mut(j, i).copy_from_slice(t.as_slice());
        }
    }
    Ok(out)
}

/// `I_n(L)`: diagonal entries `e_L`.
pub fn identity(l: &Transform, n: usize) -> Result<TubalMatrix> {
    let e = scalar::unit(l)?;
    Ok(TubalMatrix::diagonal(n, n, l.p(), &vec![e; n]))
}

/// Whether every slice of `Q` is unitary to `tol` in Frobenius norm.
pub fn is_orthogonal(l: &Transform, q: &TubalMatrix, tol: f64) -> Result<bool> {
    if q.m != q.n {
        return Err(TubalError::DimensionMismatch { context: "orthogonality needs a square matrix", expected: q.m, found: q.n });
    }
    l.require_doubly_real_preserving()?;
    Ok(orthogonality_defect(l, q)? <= tol)
}

/// `max_k ‖Φ_L(Q)(k)^H Φ_L(Q)(k) − I‖_F`.
pub fn orthogonality_defect(l: &Transform, q: &TubalMatrix) -> Result<f64> {
    let n = q.n;
    let eye = CMat::identity(n, n);
    Ok(slices(l, q)?
        .iter()
        .map(|s| (s.adjoint() * s - &eye).norm())
        .fold(0.0, f64::max))
}

/// `‖A‖_F = sqrt(Σ |a_ij|²)`.
pub fn frobenius(a: &TubalMatrix) -> f64 {
    a.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}
