//! T-/B-singular spectra, tail energies, ranks, the two best-low-rank
//! truncations and the constructive rank factorization.

use num_complex::Complex64;
use serde::Serialize;

use super::{assemble, decompose_slices, promises_real_factors, s_from_values, TsvdFactors, FACTOR_REALNESS_TOL};
use crate::error::{Result, TubalError};
use crate::linalg::{self, CMat, TubalMatrix};
use crate::scalar::modulus;
use crate::transform::Transform;

/// Relative threshold against the largest singular value used to count ranks.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// T-singular values `σ_i = |s_ii|`, nonincreasing.
    pub sigma: Vec<f64>,
    /// B-singular values: all `d_ii(k)` sorted descending.
    pub mu: Vec<f64>,
    /// `eta[i][k]` is the 0-based position of `d_ii(k)` in `mu`.
    pub eta: Vec<Vec<usize>>,
    /// `tau[i] = sqrt(Σ_{l ≥ i} σ_l²)`, the error of keeping `i` tubes; `tau[0] = ‖A‖_F`.
    pub tau: Vec<f64>,
    /// `nu[j] = sqrt(Σ_{l ≥ j} μ_l²)`, the error of keeping `j` B-singular values.
    pub nu: Vec<f64>,
    pub rank_t: usize,
    pub rank_b: usize,
    pub rank_tol: f64,
}

/// Sorts all `values[i][k]` descending; ties go to smaller `i`, then smaller `k`.
/// Returns `(mu, eta)` with `mu[eta[i][k]] == values[i][k]`.
pub fn eta_order(values: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<usize>>) {
    let mut entries: Vec<(f64, usize, usize)> = values
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(k, &d)| (d, i, k)))
        .collect();
    // Stable sort on a list already ordered by (i, k).
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut eta: Vec<Vec<usize>> = values.iter().map(|row| vec![0; row.len()]).collect();
    for (pos, &(_, i, k)) in entries.iter().enumerate() {
        eta[i][k] = pos;
    }
    (entries.into_iter().map(|e| e.0).collect(), eta)
}

/// `out[i] = sqrt(Σ_{l ≥ i} x_l²)`, summed from the smallest term up.
fn tails(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + 1];
    let mut acc = 0.0;
    for i in (0..x.len()).rev() {
        acc += x[i] * x[i];
        out[i] = acc.sqrt();
    }
    out
}

fn count_above(x: &[f64], rank_tol: f64) -> usize {
    let top = x.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    x.iter().filter(|&&v| v > rank_tol * top).count()
}

/// T- and B-singular spectra of `A` under a doubly real-preserving unitary `L`.
pub fn spectrum(l: &Transform, a: &TubalMatrix, rank_tol: f64) -> Result<SpectrumReport> {
    l.require_doubly_real_preserving()?;
    l.require_unitary()?;
    let s = super::g_part(l, a)?;
    Ok(report_from_values(&s.tubes.iter().map(modulus).collect::<Vec<_>>(), &s.transform_values, rank_tol))
}

fn report_from_values(sigma: &[f64], values: &[Vec<f64>], rank_tol: f64) -> SpectrumReport {
    let (mu, eta) = eta_order(values);
    SpectrumReport {
        sigma: sigma.to_vec(),
        tau: tails(sigma),
        nu: tails(&mu),
        rank_t: count_above(sigma, rank_tol),
        rank_b: count_above(&mu, rank_tol),
        mu,
        eta,
        rank_tol,
    }
}

impl TsvdFactors {
    /// Spectrum of the factorized tensor, read off the stored `S`. The tail
    /// energies equal the truncation errors only when `L` is unitary.
    pub fn spectrum(&self, rank_tol: f64) -> Result<SpectrumReport> {
        let sigma: Vec<f64> = self.s.tubes.iter().map(modulus).collect();
        Ok(report_from_values(&sigma, &self.s.transform_values, rank_tol))
    }
}

pub fn tubal_rank(l: &Transform, a: &TubalMatrix, rank_tol: f64) -> Result<usize> {
    Ok(spectrum(l, a, rank_tol)?.rank_t)
}

pub fn b_rank(l: &Transform, a: &TubalMatrix, rank_tol: f64) -> Result<usize> {
    Ok(spectrum(l, a, rank_tol)?.rank_b)
}

/// `U *_L S' *_L Vᵀ` where `S'` keeps `d_ll(k)` for which `keep(l, k)` holds.
/// Zeros are written in the transform domain before pulling back.
fn truncate_masked(f: &TsvdFactors, keep: impl Fn(usize, usize) -> bool) -> Result<TubalMatrix> {
    let l = f.transform();
    let masked: Vec<Vec<f64>> = f
        .s
        .transform_values
        .iter()
        .enumerate()
        .map(|(ll, row)| {
            row.iter()
                .enumerate()
                .map(|(k, &d)| if keep(ll, k) { d } else { 0.0 })
                .collect()
        })
        .collect();
    let (sj, residual) = s_from_values(l, f.s.m, f.s.n, &masked)?;
    let tolerance = FACTOR_REALNESS_TOL * f.input_norm();
    if residual > tolerance {
        return Err(TubalError::RealnessViolation { residual, tolerance, value: None });
    }
    assemble(l, &f.u, &sj.to_matrix(), &f.v)
}

/// Best tubal-rank-`i` approximation: keep the first `i` diagonal tubes of `S`.
pub fn truncate_tubal(f: &TsvdFactors, i: usize) -> Result<TubalMatrix> {
    let limit = f.s.diag_len();
    if i == 0 || i >= limit {
        return Err(TubalError::RankOutOfRange { rank: i, limit });
    }
    truncate_masked(f, |ll, _| ll < i)
}

/// Best B-rank-`j` approximation: keep the `j` largest transform-domain
/// diagonal values, ranked by [`eta_order`].
///
/// Fails with [`TubalError::SplitConjugatePair`] when the cut keeps one slice
/// of a conjugate pair and drops its partner, since no real tensor realizes
/// that truncation.
pub fn truncate_brank(f: &TsvdFactors, j: usize) -> Result<TubalMatrix> {
    let limit = f.s.diag_len() * f.s.p;
    if j == 0 || j >= limit {
        return Err(TubalError::RankOutOfRange { rank: j, limit });
    }
    let (_, eta) = eta_order(&f.s.transform_values);
    if let Some(perm) = f.transform().class().conj_structure.conjugate_pairing() {
        for row in &eta {
            for (k, &pos) in row.iter().enumerate() {
                let partner = perm[k];
                if pos < j && row[partner] >= j {
                    return Err(TubalError::SplitConjugatePair { rank: j, kept: k, dropped: partner });
                }
            }
        }
    }
    truncate_masked(f, |ll, k| eta[ll][k] < j)
}

/// `A = B *_L C` with `B` of size `m×r`, `C` of size `r×n`, `r = rank_t(A)`.
///
/// Slice `k` is split as `(Ξ(k)[:, :r_k] D_k) (Θ(k)[:, :r_k])^H`, zero-padded to
/// width `r`, where `r_k` counts the slice's singular values above
/// `rank_tol·μ_1`.
pub fn rank_factorization(l: &Transform, a: &TubalMatrix, rank_tol: f64) -> Result<(TubalMatrix, TubalMatrix)> {
    l.require_doubly_real_preserving()?;
    l.require_unitary()?;
    let (m, n, p) = a.shape();
    let sl = linalg::slices(l, a)?;
    let svds = decompose_slices(l, &sl)?;
    let rmin = m.min(n);

    let values: Vec<Vec<f64>> = (0..rmin).map(|ll| svds.iter().map(|s| s.d[ll]).collect()).collect();
    let (s_diag, _) = s_from_values(l, m, n, &values)?;
    let sigma: Vec<f64> = s_diag.tubes.iter().map(modulus).collect();
    let r = count_above(&sigma, rank_tol);
    if r == 0 {
        return Err(TubalError::ZeroTensor);
    }
    let mu_max = svds.iter().map(|s| s.d[0]).fold(0.0, f64::max);
    let thresh = rank_tol * mu_max;

    let zero = Complex64::new(0.0, 0.0);
    let mut b_slices = Vec::with_capacity(p);
    let mut c_slices = Vec::with_capacity(p);
    for svd in &svds {
        let rk = svd.d.iter().take(r).filter(|&&d| d > thresh).count();
        b_slices.push(CMat::from_fn(m, r, |i, c| if c < rk { svd.u[(i, c)] * svd.d[c] } else { zero }));
        c_slices.push(CMat::from_fn(r, n, |c, j| if c < rk { svd.v[(j, c)].conj() } else { zero }));
    }
    let (b, res_b) = linalg::from_slices(l, &b_slices)?;
    let (c, res_c) = linalg::from_slices(l, &c_slices)?;
    if promises_real_factors(l) {
        let tol_b = FACTOR_REALNESS_TOL * a.frobenius();
        for (residual, tolerance) in [(res_b, tol_b), (res_c, FACTOR_REALNESS_TOL)] {
            if residual > tolerance {
                return Err(TubalError::RealnessViolation { residual, tolerance, value: None });
            }
        }
    }
    Ok((b, c))
}
