//! Brute-force reference implementations.
//!
//! Everything here is written with explicit index loops or a dense SVD of the
//! block-diagonal matrix, so it shares no code path with the fast routines it
//! is used to check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Result, TubalError};
use crate::linalg::{CMat, TubalMatrix};
use crate::transform::Transform;

fn check_p(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(TubalError::DimensionMismatch { context, expected, found });
    }
    Ok(())
}

/// Circular convolution: `c[k] = Σ a[i]·b[j]` over `i + j ≡ k (mod p)`.
pub fn circ_conv(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_p("circ_conv", a.len(), b.len())?;
    let p = a.len();
    let mut c = vec![0.0; p];
    for i in 0..p {
        for j in 0..p {
            c[(i + j) % p] += a[i] * b[j];
        }
    }
    Ok(c)
}

/// `A *_F B` as a tube loop of circular convolutions.
pub fn circulant_product(a: &TubalMatrix, b: &TubalMatrix) -> Result<TubalMatrix> {
    let (m, s, p) = a.shape();
    check_p("circulant_product inner", s, b.rows())?;
    check_p("circulant_product tube length", p, b.tube_len())?;
    let n = b.cols();
    let mut out = TubalMatrix::zeros(m, n, p);
    for i in 0..m {
        for j in 0..n {
            for t in 0..s {
                let c = circ_conv(a.tube(i, t), b.tube(t, j))?;
                for (o, x) in out.tube_mut(i, j).iter_mut().zip(c) {
                    *o += x;
                }
            }
        }
    }
    Ok(out)
}

fn forward_loop(l: &CMat, x: &[f64]) -> Vec<Complex64> {
    let p = x.len();
    (0..p)
        .map(|k| (0..p).fold(Complex64::new(0.0, 0.0), |acc, t| acc + l[(k, t)] * x[t]))
        .collect()
}

fn inverse_loop(h: &CMat, y: &[Complex64]) -> Vec<Complex64> {
    let p = y.len();
    (0..p)
        .map(|t| (0..p).fold(Complex64::new(0.0, 0.0), |acc, k| acc + h[(t, k)] * y[k]))
        .collect()
}

/// `A *_L B` summed tube by tube, each product formed as `H((La)∘(Lb))` with
/// loops. Returns the real part and the largest discarded imaginary part.
pub fn tube_loop_product(l: &Transform, a: &TubalMatrix, b: &TubalMatrix) -> Result<(TubalMatrix, f64)> {
    let (m, s, p) = a.shape();
    check_p("tube_loop_product inner", s, b.rows())?;
    check_p("tube_loop_product tube length", p, b.tube_len())?;
    check_p("tube_loop_product transform", p, l.p())?;
    let n = b.cols();
    let mut out = TubalMatrix::zeros(m, n, p);
    let mut imag = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let mut acc = vec![Complex64::new(0.0, 0.0); p];
            for t in 0..s {
                let la = forward_loop(l.matrix(), a.tube(i, t));
                let lb = forward_loop(l.matrix(), b.tube(t, j));
                let prod: Vec<Complex64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();
                for (z, w) in acc.iter_mut().zip(inverse_loop(l.inverse_matrix(), &prod)) {
                    *z += w;
                }
            }
            for (o, z) in out.tube_mut(i, j).iter_mut().zip(&acc) {
                *o = z.re;
                imag = imag.max(z.im.abs());
            }
        }
    }
    Ok((out, imag))
}

/// Transform-domain slices built entry by entry.
pub fn slices_loop(l: &Transform, a: &TubalMatrix) -> Result<Vec<CMat>> {
    let (m, n, p) = a.shape();
    check_p("slices_loop", p, l.p())?;
    let mut out = vec![CMat::zeros(m, n); p];
    for i in 0..m {
        for j in 0..n {
            for (k, z) in forward_loop(l.matrix(), a.tube(i, j)).into_iter().enumerate() {
                out[k][(i, j)] = z;
            }
        }
    }
    Ok(out)
}

/// Block-diagonal `diag(Φ(A)(1), …, Φ(A)(p))` of size `mp × np`.
pub fn bldg(l: &Transform, a: &TubalMatrix) -> Result<CMat> {
    let (m, n, p) = a.shape();
    let sl = slices_loop(l, a)?;
    let mut out = CMat::zeros(m * p, n * p);
    for (k, s) in sl.iter().enumerate() {
        for i in 0..m {
            for j in 0..n {
                out[(k * m + i, k * n + j)] = s[(i, j)];
            }
        }
    }
    Ok(out)
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Descending singular values of [`bldg`], from a dense SVD.
pub fn bldg_singular_values(l: &Transform, a: &TubalMatrix) -> Result<Vec<f64>> {
    let b = bldg(l, a)?;
    Ok(sorted_desc(b.singular_values().iter().copied().collect()))
}

fn count_rel(sv: &[f64], rank_tol: f64) -> usize {
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * top).count()
}

/// Rank of [`bldg`] relative to its largest singular value.
pub fn bldg_rank(l: &Transform, a: &TubalMatrix, rank_tol: f64) -> Result<usize> {
    Ok(count_rel(&bldg_singular_values(l, a)?, rank_tol))
}

/// Largest slice rank, each slice decomposed independently by a dense SVD.
/// The threshold is relative to the largest singular value over all slices.
pub fn max_slice_rank(l: &Transform, a: &TubalMatrix, rank_tol: f64) -> Result<usize> {
    let per: Vec<Vec<f64>> = slices_loop(l, a)?.iter().map(|s| s.singular_values().iter().copied().collect()).collect();
    let top = per.iter().flatten().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(per.iter().map(|sv| sv.iter().filter(|&&s| s > rank_tol * top).count()).max().unwrap_or(0))
}

fn truncated(svd: &nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>, keep: &[bool]) -> CMat {
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = CMat::zeros(u.nrows(), vt.ncols());
    for (c, &k) in keep.iter().enumerate() {
        if k {
            out += u.column(c) * vt.row(c) * Complex64::new(svd.singular_values[c], 0.0);
        }
    }
    out
}

fn fold_slices(l: &Transform, sl: &[CMat], m: usize, n: usize) -> (TubalMatrix, f64) {
    let p = sl.len();
    let mut out = TubalMatrix::zeros(m, n, p);
    let mut imag = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let y: Vec<Complex64> = sl.iter().map(|s| s[(i, j)]).collect();
            for (o, z) in out.tube_mut(i, j).iter_mut().zip(inverse_loop(l.inverse_matrix(), &y)) {
                *o = z.re;
                imag = imag.max(z.im.abs());
            }
        }
    }
    (out, imag)
}

/// Best rank-`j` approximation of [`bldg`], with its diagonal blocks folded
/// back into a tensor. Off-diagonal leakage and the discarded imaginary part
/// are returned alongside.
pub fn bldg_best_brank(l: &Transform, a: &TubalMatrix, j: usize) -> Result<(TubalMatrix, f64, f64)> {
    let (m, n, p) = a.shape();
    let b = bldg(l, a)?;
    let svd = b.svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut keep = vec![false; order.len()];
    for &c in order.iter().take(j) {
        keep[c] = true;
    }
    let approx = truncated(&svd, &keep);
    let mut leak = 0.0f64;
    let mut blocks = Vec::with_capacity(p);
    for k in 0..p {
        blocks.push(approx.view((k * m, k * n), (m, n)).into_owned());
        for q in 0..p {
            if q != k {
                leak = leak.max(approx.view((k * m, q * n), (m, n)).camax());
            }
        }
    }
    let (t, imag) = fold_slices(l, &blocks, m, n);
    Ok((t, leak, imag))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CompetitorMode {
    Tubal,
    Brank,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompetitorSpec {
    pub mode: CompetitorMode,
    pub rank: usize,
    pub trials: usize,
    pub seed: u64,
    /// Noise level of perturbed competitors, relative to the RMS entry of `A`.
    pub perturbation_scale: f64,
}

impl CompetitorSpec {
    pub fn new(mode: CompetitorMode, rank: usize, trials: usize, seed: u64) -> Self {
        CompetitorSpec { mode, rank, trials, seed, perturbation_scale: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub dominated: bool,
    /// Smallest `‖A − competitor‖ − ‖A − candidate‖` seen.
    pub worst_margin: f64,
    pub candidate_error: f64,
    pub best_competitor_error: f64,
    pub evaluated: usize,
    /// Competitors whose oracle rank exceeded the budget.
    pub rejected: usize,
}

/// Slack allowed when comparing errors.
pub const DOMINANCE_SLACK: f64 = 1e-9;
const ADMISSIBLE_RANK_TOL: f64 = 1e-9;

fn gaussian(m: usize, n: usize, p: usize, rng: &mut ChaCha8Rng) -> TubalMatrix {
    TubalMatrix::from_fn(m, n, p, |_, _, _| rng.sample(StandardNormal))
}

/// Per-slice projection: tubal mode keeps `rank` values in every slice,
/// B-rank mode keeps the `rank` largest values over all slices.
fn reproject(l: &Transform, x: &TubalMatrix, mode: CompetitorMode, rank: usize) -> Result<TubalMatrix> {
    let (m, n, _) = x.shape();
    let svds: Vec<_> = slices_loop(l, x)?.into_iter().map(|s| s.svd(true, true)).collect();
    let mut keeps: Vec<Vec<bool>> = svds.iter().map(|s| vec![false; s.singular_values.len()]).collect();
    match mode {
        CompetitorMode::Tubal => {
            for (svd, keep) in svds.iter().zip(keeps.iter_mut()) {
                let mut idx: Vec<usize> = (0..keep.len()).collect();
                idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
                for &c in idx.iter().take(rank) {
                    keep[c] = true;
                }
            }
        }
        CompetitorMode::Brank => {
            let mut all: Vec<(f64, usize, usize)> = svds
                .iter()
                .enumerate()
                .flat_map(|(k, s)| s.singular_values.iter().enumerate().map(move |(c, &v)| (v, k, c)))
                .collect();
            all.sort_by(|a, b| b.0.total_cmp(&a.0));
            for &(_, k, c) in all.iter().take(rank) {
                keeps[k][c] = true;
            }
        }
    }
    let blocks: Vec<CMat> = svds.iter().zip(&keeps).map(|(s, k)| truncated(s, k)).collect();
    Ok(fold_slices(l, &blocks, m, n).0)
}

fn admissible(l: &Transform, x: &TubalMatrix, mode: CompetitorMode, rank: usize) -> Result<bool> {
    let r = match mode {
        CompetitorMode::Tubal => max_slice_rank(l, x, ADMISSIBLE_RANK_TOL)?,
        CompetitorMode::Brank => {
            let sv: Vec<f64> = slices_loop(l, x)?.iter().flat_map(|s| s.singular_values().iter().copied().collect::<Vec<_>>()).collect();
            count_rel(&sv, ADMISSIBLE_RANK_TOL)
        }
    };
    Ok(r <= rank)
}

/// Pits `candidate` against `trials` random competitors of admissible rank.
///
/// Even trials are fresh random constructions (a random `B *_L C` with inner
/// size `rank` in tubal mode; a reprojected Gaussian tensor in B-rank mode).
/// Odd trials move the candidate toward `A`, add noise and reproject.
/// Competitors that fail the oracle rank check are counted and skipped.
pub fn random_search_optimality(
    l: &Transform,
    a: &TubalMatrix,
    candidate: &TubalMatrix,
    spec: &CompetitorSpec,
) -> Result<OptimalityReport> {
    let (m, n, p) = a.shape();
    if candidate.shape() != a.shape() {
        return Err(TubalError::DimensionMismatch {
            context: "random_search_optimality candidate",
            expected: m * n * p,
            found: candidate.data().len(),
        });
    }
    let candidate_error = a.distance(candidate)?;
    let rms = a.frobenius() / ((m * n * p) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut worst_margin = f64::INFINITY;
    let mut best = f64::INFINITY;
    let (mut evaluated, mut rejected) = (0, 0);

    for trial in 0..spec.trials {
        let competitor = if trial % 2 == 0 {
            match spec.mode {
                CompetitorMode::Tubal => {
                    let b = gaussian(m, spec.rank, p, &mut rng).scale(rms);
                    let c = gaussian(spec.rank, n, p, &mut rng);
                    tube_loop_product(l, &b, &c)?.0
                }
                CompetitorMode::Brank => reproject(l, &gaussian(m, n, p, &mut rng).scale(rms), spec.mode, spec.rank)?,
            }
        } else {
            let t: f64 = rng.random_range(0.0..=1.0);
            let noise = gaussian(m, n, p, &mut rng).scale(spec.perturbation_scale * rms);
            let x = candidate.add(&a.sub(candidate)?.scale(t))?.add(&noise)?;
            reproject(l, &x, spec.mode, spec.rank)?
        };
        if !admissible(l, &competitor, spec.mode, spec.rank)? {
            rejected += 1;
            continue;
        }
        evaluated += 1;
        let err = a.distance(&competitor)?;
        best = best.min(err);
        worst_margin = worst_margin.min(err - candidate_error);
    }
    Ok(OptimalityReport {
        dominated: worst_margin >= -DOMINANCE_SLACK,
        worst_margin,
        candidate_error,
        best_competitor_error: best,
        evaluated,
        rejected,
    })
}

/// Dense real matrix view of a `p = 1` tensor.
pub fn as_real_matrix(a: &TubalMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{tprod, TubalScalar};
    use crate::tsvd::{spectrum, truncate_tubal, tsvd, DEFAULT_RANK_TOL};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn conv_with_unit_and_shift() {
        let b = [0.3, -1.0, 2.5, 4.0];
        assert_eq!(circ_conv(&[1.0, 0.0, 0.0, 0.0], &b).unwrap(), b.to_vec());
        assert_eq!(circ_conv(&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(circ_conv(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn conv_matches_dft_product() {
        let mut r = rng(10);
        for p in 1..=6 {
            let l = Transform::dft(p).unwrap();
            let a: Vec<f64> = (0..p).map(|_| r.sample(StandardNormal)).collect();
            let b: Vec<f64> = (0..p).map(|_| r.sample(StandardNormal)).collect();
            let fast = tprod(&l, &TubalScalar::from(a.clone()), &TubalScalar::from(b.clone())).unwrap();
            for (x, y) in fast.as_slice().iter().zip(circ_conv(&a, &b).unwrap()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tube_loop_agrees_with_circulant() {
        let a = TubalMatrix::random(2, 3, 4, &mut rng(11));
        let b = TubalMatrix::random(3, 2, 4, &mut rng(12));
        let (x, imag) = tube_loop_product(&Transform::dft(4).unwrap(), &a, &b).unwrap();
        assert!(imag < 1e-12);
        assert!(x.distance(&circulant_product(&a, &b).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn bldg_shape_and_norm() {
        let l = Transform::unitary_dft(3).unwrap();
        let a = TubalMatrix::random(2, 4, 3, &mut rng(13));
        let b = bldg(&l, &a).unwrap();
        assert_eq!((b.nrows(), b.ncols()), (6, 12));
        assert!((b.norm() - a.frobenius()).abs() < 1e-12 * a.frobenius().max(1.0));
        assert_eq!(b[(0, 4)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn bldg_p1_is_the_slice() {
        let l = Transform::identity(1).unwrap();
        let a = TubalMatrix::random(3, 2, 1, &mut rng(14));
        let b = bldg(&l, &a).unwrap();
        assert_eq!(b.map(|z| z.re), as_real_matrix(&a));
    }

    #[test]
    fn bldg_rank_counts_all_slices() {
        // Rank-1 in every slice of a 3×3×3 tensor: B-rank 3, tubal rank 1.
        let l = Transform::dct(3).unwrap();
        let x = TubalMatrix::random(3, 1, 3, &mut rng(15));
        let y = TubalMatrix::random(1, 3, 3, &mut rng(16));
        let a = tube_loop_product(&l, &x, &y).unwrap().0;
        assert_eq!(bldg_rank(&l, &a, 1e-10).unwrap(), 3);
        assert_eq!(max_slice_rank(&l, &a, 1e-10).unwrap(), 1);
    }

    #[test]
    fn candidate_equal_to_target_dominates() {
        let l = Transform::unitary_dft(3).unwrap();
        let a = TubalMatrix::random(3, 3, 3, &mut rng(17));
        let spec = CompetitorSpec::new(CompetitorMode::Tubal, 3, 20, 1);
        let rep = random_search_optimality(&l, &a, &a, &spec).unwrap();
        assert!(rep.dominated && rep.candidate_error == 0.0);
    }

    #[test]
    fn truncation_dominates_and_swapped_candidate_does_not() {
        let l = Transform::dct(3).unwrap();
        let a = TubalMatrix::random(4, 3, 3, &mut rng(18));
        let f = tsvd(&l, &a).unwrap();
        let a1 = truncate_tubal(&f, 1).unwrap();
        let spec = CompetitorSpec::new(CompetitorMode::Tubal, 1, 60, 2);
        let rep = random_search_optimality(&l, &a, &a1, &spec).unwrap();
        assert!(rep.dominated, "{rep:?}");
        assert!(rep.evaluated > 0);

        // Keep the second tube instead of the first.
        let s = f.s.to_matrix();
        let mut s_bad = TubalMatrix::zeros(4, 3, 3);
        s_bad.tube_mut(1, 1).copy_from_slice(s.tube(1, 1));
        let bad = crate::tsvd::assemble(&l, &f.u, &s_bad, &f.v).unwrap();
        let rep = random_search_optimality(&l, &a, &bad, &spec).unwrap();
        assert!(!rep.dominated, "{rep:?}");
        let sp = spectrum(&l, &a, DEFAULT_RANK_TOL).unwrap();
        assert!(rep.best_competitor_error >= sp.tau[1] - 1e-9);
    }
}
