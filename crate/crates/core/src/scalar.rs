//! The tubal scalar ring `K_p(L) = (R^p, +, ⊙_L)`.

use std::ops::{Add, Index, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TubalError};
use crate::transform::{matvec, Transform};

/// Relative tolerance on the imaginary residual of a ring product.
pub const REALNESS_TOL: f64 = 1e-9;

/// Default tolerance for [`is_symmetric`] and [`is_psd`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Minimum modulus of a transform-domain component, relative to `|a|`, for
/// `a` to count as invertible.
pub const INVERTIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TubalScalar(Vec<f64>);

impl TubalScalar {
    pub fn new(data: Vec<f64>) -> Self {
        TubalScalar(data)
    }

    pub fn zeros(p: usize) -> Self {
        TubalScalar(vec![0.0; p])
    }

    /// The standard basis vector `e_k` (0-based `k`).
    pub fn basis(p: usize, k: usize) -> Self {
        let mut v = vec![0.0; p];
        v[k] = 1.0;
        TubalScalar(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        TubalScalar(self.0.iter().map(|x| x * s).collect())
    }

    /// Euclidean norm `|a|`.
    pub fn modulus(&self) -> f64 {
        modulus(self)
    }

    pub fn max_abs_diff(&self, other: &TubalScalar) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for TubalScalar {
    fn from(v: Vec<f64>) -> Self {
        TubalScalar(v)
    }
}

impl From<&[f64]> for TubalScalar {
    fn from(v: &[f64]) -> Self {
        TubalScalar(v.to_vec())
    }
}

impl Index<usize> for TubalScalar {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl Add for &TubalScalar {
    type Output = TubalScalar;
    fn add(self, rhs: &TubalScalar) -> TubalScalar {
        TubalScalar(self.0.iter().zip(&rhs.0).map(|(x, y)| x + y).collect())
    }
}

impl Sub for &TubalScalar {
    type Output = TubalScalar;
    fn sub(self, rhs: &TubalScalar) -> TubalScalar {
        TubalScalar(self.0.iter().zip(&rhs.0).map(|(x, y)| x - y).collect())
    }
}

impl Neg for &TubalScalar {
    type Output = TubalScalar;
    fn neg(self) -> TubalScalar {
        self.scale(-1.0)
    }
}

/// Euclidean norm of a tubal scalar.
pub fn modulus(a: &TubalScalar) -> f64 {
    a.0.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_len(l: &Transform, a: &TubalScalar, context: &'static str) -> Result<()> {
    if a.len() == l.p() {
        Ok(())
    } else {
        Err(TubalError::DimensionMismatch { context, expected: l.p(), found: a.len() })
    }
}

/// Takes the real part of `z` if its imaginary residual is within `tolerance`.
pub(crate) fn realify(z: Vec<Complex64>, tolerance: f64) -> Result<Vec<f64>> {
    let residual = z.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if residual > tolerance || !residual.is_finite() {
        return Err(TubalError::RealnessViolation { residual, tolerance, value: Some(z) });
    }
    Ok(z.into_iter().map(|v| v.re).collect())
}

/// `H ((L a) ∘ (L b))` for arbitrary complex inputs and any invertible `L`.
pub fn tprod_complex(l: &Transform, a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let fa = l.forward(a)?;
    let fb = l.forward(b)?;
    let had: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    Ok(matvec(l.inverse_matrix(), &had))
}

/// `a ⊙_L b`.
///
/// The product is computed in the transform domain and its imaginary
/// residual checked against `1e−9·(|a||b| + 1)` before it is discarded. A
/// violation is reported together with the complex product, even when `L` is
/// not flagged real-preserving.
pub fn tprod(l: &Transform, a: &TubalScalar, b: &TubalScalar) -> Result<TubalScalar> {
    check_len(l, a, "tprod")?;
    check_len(l, b, "tprod")?;
    let fa = l.forward_real(a.as_slice())?;
    let fb = l.forward_real(b.as_slice())?;
    let had: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let z = matvec(l.inverse_matrix(), &had);
    let tolerance = REALNESS_TOL * (modulus(a) * modulus(b) + 1.0);
    let re = realify(z, tolerance)?;
    l.require_real_preserving()?;
    Ok(TubalScalar(re))
}

/// Unit element `e_L(k) = Σ_j H_kj`.
pub fn unit(l: &Transform) -> Result<TubalScalar> {
    l.require_real_preserving()?;
    let h = l.inverse_matrix();
    let sums: Vec<Complex64> = (0..l.p()).map(|k| h.row(k).iter().sum()).collect();
    Ok(TubalScalar(realify(sums, REALNESS_TOL)?))
}

/// Ring inverse `a⁻¹ = H (1 / (L a))`.
pub fn invert(l: &Transform, a: &TubalScalar) -> Result<TubalScalar> {
    check_len(l, a, "invert")?;
    l.require_real_preserving()?;
    let fa = l.forward_real(a.as_slice())?;
    let threshold = INVERTIBILITY_TOL * modulus(a);
    let mut recip = Vec::with_capacity(fa.len());
    for (component, z) in fa.iter().enumerate() {
        let m = z.norm();
        if m <= threshold || m == 0.0 {
            return Err(TubalError::NotInvertible { component, modulus: m });
        }
        recip.push(z.inv());
    }
    let z = matvec(l.inverse_matrix(), &recip);
    let scale = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(TubalScalar(realify(z, REALNESS_TOL * (scale + 1.0))?))
}

/// Tubal transpose `aᵀ = ψ_L(a) = H conj(L a)`, applied as a real matrix.
pub fn transpose_scalar(l: &Transform, a: &TubalScalar) -> Result<TubalScalar> {
    check_len(l, a, "transpose")?;
    let psi = l.require_doubly_real_preserving()?;
    Ok(apply_real(psi, a.as_slice()))
}

pub(crate) fn apply_real(m: &nalgebra::DMatrix<f64>, x: &[f64]) -> TubalScalar {
    TubalScalar(
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * x[c]).sum())
            .collect(),
    )
}

fn normalized(a: &TubalScalar) -> TubalScalar {
    let m = modulus(a);
    if m < 1e-300 {
        a.clone()
    } else {
        a.scale(1.0 / m)
    }
}

/// `|aᵀ − a|_∞ ≤ tol` after scaling `a` to unit modulus.
pub fn is_symmetric(l: &Transform, a: &TubalScalar, tol: f64) -> Result<bool> {
    let an = normalized(a);
    let at = transpose_scalar(l, &an)?;
    Ok(at.max_abs_diff(&an) <= tol)
}

/// Symmetric and `Re φ_L(a)(k) ≥ −tol` for all `k`, after normalization.
/// The imaginary part of `φ_L(a)` must also be within `tol`.
pub fn is_psd(l: &Transform, a: &TubalScalar, tol: f64) -> Result<bool> {
    if !is_symmetric(l, a, tol)? {
        return Ok(false);
    }
    let an = normalized(a);
    let fa = l.forward_real(an.as_slice())?;
    Ok(fa.iter().all(|z| z.re >= -tol && z.im.abs() <= tol))
}
