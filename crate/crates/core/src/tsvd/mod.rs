//! T-SVD `A = U *_L S *_L Vᵀ` and everything built on it.
//!
//! Every transform-domain slice `Φ_L(A)(k)` gets its own complex SVD
//! `Ξ(k) D(k) Θ(k)^H`; the factors are pulled back tube-wise with `L⁻¹`.
//! When conjugation pairs slices (`conj(L) = Π L` for a permutation `Π`, as
//! for the DFT), only one slice of each pair is decomposed and its partner
//! receives the conjugated factors, which makes `U`, `S` and `V` real up to
//! round-off. For real `L` each slice is real and decomposed as such.

mod jacobi;
mod spectrum;

pub use jacobi::{complex_svd, SliceSvd, MAX_SWEEPS};
pub use spectrum::{
    b_rank, eta_order, rank_factorization, spectrum, truncate_brank, truncate_tubal, tubal_rank,
    SpectrumReport, DEFAULT_RANK_TOL,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TubalError};
use crate::linalg::{self, CMat, TubalMatrix};
use crate::scalar::TubalScalar;
use crate::transform::{ConjStructure, Transform};

/// Factor realness tolerance: `U` and `V` absolute, `S` relative to `‖A‖_F`.
pub const FACTOR_REALNESS_TOL: f64 = 1e-6;

/// Diagonal middle factor of a T-SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct SDiagonal {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    /// Diagonal tubes `s_ll`, `l = 0..min(m,n)`.
    pub tubes: Vec<TubalScalar>,
    /// `d_ll(k)`: `transform_values[l][k]`, nonnegative and nonincreasing in `l`.
    pub transform_values: Vec<Vec<f64>>,
}

impl SDiagonal {
    pub fn diag_len(&self) -> usize {
        self.tubes.len()
    }

    pub fn to_matrix(&self) -> TubalMatrix {
        TubalMatrix::diagonal(self.m, self.n, self.p, &self.tubes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorResiduals {
    pub u: f64,
    pub s: f64,
    pub v: f64,
}

#[derive(Debug, Clone)]
pub struct TsvdFactors {
    pub u: TubalMatrix,
    pub s: SDiagonal,
    pub v: TubalMatrix,
    pub realness_residuals: FactorResiduals,
    /// `‖Φ_L(A)(k) − Ξ(k) D(k) Θ(k)^H‖_F` per slice.
    pub slice_svd_backward_errors: Vec<f64>,
    transform: Transform,
    input_norm: f64,
}

impl TsvdFactors {
    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// `‖A‖_F` of the factorized tensor.
    pub fn input_norm(&self) -> f64 {
        self.input_norm
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.s.m, self.s.n, self.s.p)
    }

    /// `U *_L S *_L Vᵀ`.
    pub fn reconstruct(&self) -> Result<TubalMatrix> {
        assemble(&self.transform, &self.u, &self.s.to_matrix(), &self.v)
    }
}

pub(crate) fn assemble(l: &Transform, u: &TubalMatrix, s: &TubalMatrix, v: &TubalMatrix) -> Result<TubalMatrix> {
    let us = linalg::mat_tprod(l, u, s)?;
    linalg::mat_tprod(l, &us, &linalg::mat_transpose(l, v)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SliceSource {
    Direct,
    RealPart,
    ConjOf(usize),
}

/// Whether the transform's conjugation structure guarantees real factors.
pub(crate) fn promises_real_factors(l: &Transform) -> bool {
    let cs = &l.class().conj_structure;
    matches!(cs, ConjStructure::Identity) || cs.conjugate_pairing().is_some()
}

fn slice_plan(l: &Transform) -> Vec<SliceSource> {
    let p = l.p();
    let cs = &l.class().conj_structure;
    if matches!(cs, ConjStructure::Identity) {
        return vec![SliceSource::RealPart; p];
    }
    match cs.conjugate_pairing() {
        Some(perm) => (0..p)
            .map(|k| match perm[k] {
                q if q == k => SliceSource::RealPart,
                q if q > k => SliceSource::Direct,
                q => SliceSource::ConjOf(q),
            })
            .collect(),
        None => vec![SliceSource::Direct; p],
    }
}

/// SVDs of all slices, sharing work across conjugate pairs. Independent
/// slices are decomposed in parallel; the result does not depend on the
/// schedule.
pub(crate) fn decompose_slices(l: &Transform, sl: &[CMat]) -> Result<Vec<SliceSvd>> {
    let plan = slice_plan(l);
    let computed: Vec<(usize, SliceSvd)> = plan
        .par_iter()
        .enumerate()
        .filter(|(_, src)| !matches!(src, SliceSource::ConjOf(_)))
        .map(|(k, src)| {
            let svd = match src {
                SliceSource::RealPart => complex_svd(&sl[k].map(|z| Complex64::new(z.re, 0.0))),
                _ => complex_svd(&sl[k]),
            }?;
            Ok((k, svd))
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Option<SliceSvd>> = vec![None; plan.len()];
    for (k, svd) in computed {
        out[k] = Some(svd);
    }
    for (k, src) in plan.iter().enumerate() {
        if let SliceSource::ConjOf(q) = *src {
            out[k] = out[q].as_ref().map(SliceSvd::conj);
        }
    }
    Ok(out.into_iter().map(|s| s.expect("every slice planned")).collect())
}

/// Builds the diagonal tubes `s_ll = φ_L⁻¹(d_ll)` from transform-domain values.
pub(crate) fn s_from_values(
    l: &Transform,
    m: usize,
    n: usize,
    values: &[Vec<f64>],
) -> Result<(SDiagonal, f64)> {
    let p = l.p();
    let r = m.min(n);
    let d_slices: Vec<CMat> = (0..p)
        .map(|k| {
            let mut d = CMat::zeros(m, n);
            for (ll, row) in values.iter().enumerate().take(r) {
                d[(ll, ll)] = Complex64::new(row[k], 0.0);
            }
            d
        })
        .collect();
    let (smat, residual) = linalg::from_slices(l, &d_slices)?;
    let tubes = (0..r).map(|ll| smat.entry(ll, ll)).collect();
    Ok((
        SDiagonal { m, n, p, tubes, transform_values: values.to_vec() },
        residual,
    ))
}

fn values_table(svds: &[SliceSvd], r: usize) -> Vec<Vec<f64>> {
    (0..r).map(|ll| svds.iter().map(|s| s.d[ll]).collect()).collect()
}

/// T-SVD of `A` under a doubly real-preserving `L`.
pub fn tsvd(l: &Transform, a: &TubalMatrix) -> Result<TsvdFactors> {
    l.require_doubly_real_preserving()?;
    let (m, n, _) = a.shape();
    let sl = linalg::slices(l, a)?;
    let svds = decompose_slices(l, &sl)?;
    let backward: Vec<f64> = sl
        .iter()
        .zip(&svds)
        .map(|(s, svd)| (s - svd.reconstruct()).norm())
        .collect();

    let u_slices: Vec<CMat> = svds.iter().map(|s| s.u.clone()).collect();
    let v_slices: Vec<CMat> = svds.iter().map(|s| s.v.clone()).collect();
    let (u, res_u) = linalg::from_slices(l, &u_slices)?;
    let (v, res_v) = linalg::from_slices(l, &v_slices)?;
    let (s, res_s) = s_from_values(l, m, n, &values_table(&svds, m.min(n)))?;

    let input_norm = a.frobenius();
    if promises_real_factors(l) {
        let s_tol = FACTOR_REALNESS_TOL * input_norm;
        for (residual, tolerance) in [
            (res_u, FACTOR_REALNESS_TOL),
            (res_v, FACTOR_REALNESS_TOL),
            (res_s, s_tol),
        ] {
            if residual > tolerance {
                return Err(TubalError::RealnessViolation { residual, tolerance, value: None });
            }
        }
    }

    Ok(TsvdFactors {
        u,
        s,
        v,
        realness_residuals: FactorResiduals { u: res_u, s: res_s, v: res_v },
        slice_svd_backward_errors: backward,
        transform: l.clone(),
        input_norm,
    })
}

/// The canonical s-diagonal part `G(A)`: depends only on slice singular values.
pub fn g_part(l: &Transform, a: &TubalMatrix) -> Result<SDiagonal> {
    l.require_doubly_real_preserving()?;
    let (m, n, _) = a.shape();
    let sl = linalg::slices(l, a)?;
    let svds = decompose_slices(l, &sl)?;
    let (s, residual) = s_from_values(l, m, n, &values_table(&svds, m.min(n)))?;
    let tolerance = FACTOR_REALNESS_TOL * a.frobenius();
    if promises_real_factors(l) && residual > tolerance {
        return Err(TubalError::RealnessViolation { residual, tolerance, value: None });
    }
    Ok(s)
}

/// Outcome of [`validate_s_diagonal`]; every `worst_*` is relative to the
/// largest transform-domain magnitude of the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SDiagonalReport {
    pub symmetric: bool,
    pub psd: bool,
    pub ordered: bool,
    pub offdiag_zero: bool,
    pub worst_asymmetry: f64,
    pub worst_negativity: f64,
    pub worst_disorder: f64,
    pub worst_offdiag: f64,
}

impl SDiagonalReport {
    pub fn all(&self) -> bool {
        self.symmetric && self.psd && self.ordered && self.offdiag_zero
    }
}

/// Checks the s-diagonal properties of a tubal matrix: off-diagonal entries
/// vanish, diagonal tubes are symmetric and PSD, and `φ_L(s_11)(k) ≥ φ_L(s_22)(k) ≥ …`.
pub fn validate_s_diagonal(l: &Transform, s: &TubalMatrix, tol: f64) -> Result<SDiagonalReport> {
    let psi = l.require_doubly_real_preserving()?;
    let (m, n, p) = s.shape();
    if p != l.p() {
        return Err(TubalError::DimensionMismatch { context: "tube length vs transform size", expected: l.p(), found: p });
    }
    let r = m.min(n);
    let diag: Vec<Vec<Complex64>> = (0..r)
        .map(|ll| l.forward_real(s.tube(ll, ll)))
        .collect::<Result<_>>()?;

    let scale = diag
        .iter()
        .flatten()
        .map(|z| z.norm())
        .chain(s.data().iter().map(|x| x.abs()))
        .fold(0.0, f64::max)
        .max(1e-300);

    let mut worst_asymmetry: f64 = 0.0;
    for ll in 0..r {
        let t = s.tube(ll, ll);
        let tt = crate::scalar::apply_real(psi, t);
        let diff = tt
            .as_slice()
            .iter()
            .zip(t)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst_asymmetry = worst_asymmetry.max(diff / scale);
    }

    let mut worst_negativity: f64 = 0.0;
    for z in diag.iter().flatten() {
        worst_negativity = worst_negativity.max((-z.re).max(0.0) / scale).max(z.im.abs() / scale);
    }

    let mut worst_disorder: f64 = 0.0;
    for ll in 1..r {
        for (cur, prev) in diag[ll].iter().zip(&diag[ll - 1]) {
            worst_disorder = worst_disorder.max((cur.re - prev.re).max(0.0) / scale);
        }
    }

    let mut worst_offdiag: f64 = 0.0;
    for i in 0..m {
        for j in 0..n {
            if i != j {
                let big = s.tube(i, j).iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
                worst_offdiag = worst_offdiag.max(big / scale);
            }
        }
    }

    Ok(SDiagonalReport {
        symmetric: worst_asymmetry <= tol,
        psd: worst_asymmetry <= tol && worst_negativity <= tol,
        ordered: worst_disorder <= tol,
        offdiag_zero: worst_offdiag <= tol,
        worst_asymmetry,
        worst_negativity,
        worst_disorder,
        worst_offdiag,
    })
}
