//! One-sided (Hestenes) Jacobi SVD for dense complex matrices.
//!
//! Columns of `M V` are rotated pairwise until mutually orthogonal; the column
//! norms are the singular values. Real input stays real: every rotation phase
//! is then exactly `±1`.

use num_complex::Complex64;

use crate::error::{Result, TubalError};
use crate::linalg::CMat;

/// Maximum number of full sweeps before [`complex_svd`] gives up.
pub const MAX_SWEEPS: usize = 80;

/// `M = u · diag(d) · v^H` with `u` (m×m) and `v` (n×n) unitary.
#[derive(Debug, Clone)]
pub struct SliceSvd {
    pub u: CMat,
    pub d: Vec<f64>,
    pub v: CMat,
}

impl SliceSvd {
    /// `u · diag(d) · v^H`, using only the leading `min(m,n)` columns.
    pub fn reconstruct(&self) -> CMat {
        let m = self.u.nrows();
        let n = self.v.nrows();
        let mut out = CMat::zeros(m, n);
        for (l, &dl) in self.d.iter().enumerate() {
            if dl == 0.0 {
                continue;
            }
            for i in 0..m {
                let ud = self.u[(i, l)] * dl;
                for j in 0..n {
                    out[(i, j)] += ud * self.v[(j, l)].conj();
                }
            }
        }
        out
    }

    /// Complex conjugate of every factor; the SVD of `conj(M)`.
    pub fn conj(&self) -> SliceSvd {
        SliceSvd {
            u: self.u.map(|z| z.conj()),
            d: self.d.clone(),
            v: self.v.map(|z| z.conj()),
        }
    }
}

/// SVD of a complex `m×n` matrix with singular values in descending order.
///
/// Each left singular vector is rotated so its largest-modulus entry is real
/// and positive (the first such entry on ties); the matching right vector
/// gets the same phase.
pub fn complex_svd(mat: &CMat) -> Result<SliceSvd> {
    if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(TubalError::InvalidDimension("SVD input has non-finite entries".into()));
    }
    let (m, n) = mat.shape();
    let mut svd = if m >= n {
        tall_svd(mat)?
    } else {
        let t = tall_svd(&mat.adjoint())?;
        SliceSvd { u: t.v, d: t.d, v: t.u }
    };
    fix_phases(&mut svd);
    Ok(svd)
}

fn col_norm_sq(a: &CMat, j: usize) -> f64 {
    a.column(j).iter().map(|z| z.norm_sqr()).sum()
}

fn tall_svd(mat: &CMat) -> Result<SliceSvd> {
    let (m, n) = mat.shape();
    let mut a = mat.clone();
    let mut v = CMat::identity(n, n);
    let eps = f64::EPSILON;
    let threshold = eps * m as f64;
    // Columns at round-off level relative to the whole matrix are left alone:
    // rotating them only swaps one noise pattern for another.
    let negligible = (eps * mat.norm()).powi(2);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let alpha = col_norm_sq(&a, i);
                let beta = col_norm_sq(&a, j);
                let gamma: Complex64 = (0..m).map(|r| a[(r, i)].conj() * a[(r, j)]).sum();
                let g = gamma.norm();
                if g == 0.0 || alpha <= negligible || beta <= negligible || g <= threshold * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // [x_i, x_j] ← [c·x_i − s·conj(φ)·x_j, s·φ·x_i + c·x_j]
                let sp = phase * s;
                let spc = phase.conj() * s;
                for r in 0..m {
                    let xi = a[(r, i)];
                    let xj = a[(r, j)];
                    a[(r, i)] = xi * c - spc * xj;
                    a[(r, j)] = sp * xi + xj * c;
                }
                for r in 0..n {
                    let xi = v[(r, i)];
                    let xj = v[(r, j)];
                    v[(r, i)] = xi * c - spc * xj;
                    v[(r, j)] = sp * xi + xj * c;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(TubalError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<f64> = (0..n).map(|j| col_norm_sq(&a, j).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let d: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let vs = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);

    // Columns whose norm is at round-off level carry no direction; they are
    // replaced during completion.
    let dmax = d.first().copied().unwrap_or(0.0);
    let floor = dmax * eps * (m.max(n) as f64);
    let mut u = CMat::zeros(m, m);
    let mut filled = 0;
    for (c, &j) in order.iter().enumerate() {
        if d[c] > floor && d[c] > 0.0 {
            let inv = 1.0 / d[c];
            for r in 0..m {
                u[(r, c)] = a[(r, j)] * inv;
            }
            filled += 1;
        } else {
            break;
        }
    }
    complete_orthonormal(&mut u, filled);
    Ok(SliceSvd { u, d, v: vs })
}

/// Fills columns `filled..m` of `u` with an orthonormal completion of the
/// first `filled` columns, drawing candidates from the standard basis.
fn complete_orthonormal(u: &mut CMat, filled: usize) {
    let m = u.nrows();
    let mut have = filled;
    let mut candidate = 0;
    while have < m && candidate < m {
        let mut w = vec![Complex64::new(0.0, 0.0); m];
        w[candidate] = Complex64::new(1.0, 0.0);
        candidate += 1;
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for c in 0..have {
                let proj: Complex64 = (0..m).map(|r| u[(r, c)].conj() * w[r]).sum();
                for r in 0..m {
                    w[r] -= u[(r, c)] * proj;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for r in 0..m {
                u[(r, have)] = w[r] / norm;
            }
            have += 1;
        }
    }
}

fn fix_phases(svd: &mut SliceSvd) {
    let k = svd.d.len();
    for l in 0..svd.u.ncols() {
        let theta = unit_phase_of_largest(&svd.u, l);
        for r in 0..svd.u.nrows() {
            svd.u[(r, l)] *= theta;
        }
        if l < k {
            for r in 0..svd.v.nrows() {
                svd.v[(r, l)] *= theta;
            }
        }
    }
    for l in k..svd.v.ncols() {
        let theta = unit_phase_of_largest(&svd.v, l);
        for r in 0..svd.v.nrows() {
            svd.v[(r, l)] *= theta;
        }
    }
}

/// `conj(z)/|z|` for the first largest-modulus entry `z` of column `col`.
fn unit_phase_of_largest(mat: &CMat, col: usize) -> Complex64 {
    let mut best = Complex64::new(0.0, 0.0);
    let mut best_norm = -1.0;
    for r in 0..mat.nrows() {
        let z = mat[(r, col)];
        let nz = z.norm();
        if nz > best_norm {
            best = z;
            best_norm = nz;
        }
    }
    if best_norm > 0.0 {
        best.conj() / best_norm
    } else {
        Complex64::new(1.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_complex(m: usize, n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(m, n, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
    }

    fn check_contract(mat: &CMat, svd: &SliceSvd) {
        let (m, n) = mat.shape();
        let backward = (mat - svd.reconstruct()).norm();
        assert!(backward <= 1e-10 * (mat.norm() + 1.0), "backward {backward}");
        let eu = (svd.u.adjoint() * &svd.u - CMat::identity(m, m)).norm();
        let ev = (svd.v.adjoint() * &svd.v - CMat::identity(n, n)).norm();
        assert!(eu <= 1e-10 * m as f64 && ev <= 1e-10 * n as f64, "eu {eu} ev {ev}");
        assert!(svd.d.windows(2).all(|w| w[0] >= w[1]));
        assert!(svd.d.iter().all(|&x| x >= 0.0));
    }

    /// Eigenvalues of the Hermitian matrix `M^H M` by cyclic two-sided Jacobi.
    fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
        let n = h.nrows();
        let mut a = h.clone();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    let phase = apq / apq.norm();
                    let theta = 0.5 * (2.0 * apq.norm()).atan2(a[(q, q)].re - a[(p, p)].re);
                    let (c, s) = (theta.cos(), theta.sin());
                    // Rotation G with columns p,q: [c, s·φ̄ ; −s·φ, c]ᴴ-style update.
                    let mut g = CMat::identity(n, n);
                    g[(p, p)] = Complex64::new(c, 0.0);
                    g[(q, q)] = Complex64::new(c, 0.0);
                    g[(p, q)] = phase * s;
                    g[(q, p)] = -phase.conj() * s;
                    a = g.adjoint() * &a * &g;
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        ev
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let svd = complex_svd(&CMat::identity(4, 4)).unwrap();
        assert!(svd.d.iter().all(|&x| (x - 1.0).abs() <= 1e-15));
    }

    #[test]
    fn diagonal_with_negative_entry() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(-4.0, 0.0),
        ]));
        let svd = complex_svd(&m).unwrap();
        assert!((svd.d[0] - 4.0).abs() <= 1e-15 && (svd.d[1] - 3.0).abs() <= 1e-15);
        check_contract(&m, &svd);
    }

    #[test]
    fn random_tall_matches_hermitian_eigen_oracle() {
        let m = random_complex(5, 3, 17);
        let svd = complex_svd(&m).unwrap();
        check_contract(&m, &svd);
        let ev = hermitian_eigenvalues(&(m.adjoint() * &m));
        for (d, e) in svd.d.iter().zip(ev) {
            assert!((d - e.max(0.0).sqrt()).abs() <= 1e-10 * (1.0 + d));
        }
    }

    #[test]
    fn wide_and_square_shapes() {
        for (m, n, seed) in [(3, 5, 1), (4, 4, 2), (1, 6, 3), (6, 1, 4), (1, 1, 5)] {
            let a = random_complex(m, n, seed);
            check_contract(&a, &complex_svd(&a).unwrap());
        }
    }

    #[test]
    fn rank_deficient_and_zero() {
        let x = random_complex(5, 1, 6);
        let y = random_complex(1, 4, 7);
        let r1 = &x * &y;
        let svd = complex_svd(&r1).unwrap();
        check_contract(&r1, &svd);
        assert!(svd.d[1] <= 1e-12 * svd.d[0]);

        let z = CMat::zeros(3, 2);
        let svd = complex_svd(&z).unwrap();
        check_contract(&z, &svd);
        assert!(svd.d.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn real_input_gives_real_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = DMatrix::<f64>::from_fn(4, 3, |_, _| StandardNormal.sample(&mut rng))
            .map(|x| Complex64::new(x, 0.0));
        let svd = complex_svd(&m).unwrap();
        assert!(svd.u.iter().chain(svd.v.iter()).all(|z| z.im == 0.0));
        check_contract(&m, &svd);
    }

    #[test]
    fn phase_convention_and_conjugation() {
        let m = random_complex(4, 3, 9);
        let svd = complex_svd(&m).unwrap();
        for l in 0..4 {
            let col = svd.u.column(l);
            let (idx, _) = col
                .iter()
                .enumerate()
                .fold((0, -1.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
            assert!(col[idx].im.abs() <= 1e-15 && col[idx].re > 0.0);
        }
        let conj = complex_svd(&m.map(|z| z.conj())).unwrap();
        for (a, b) in svd.d.iter().zip(&conj.d) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert!((conj.u.map(|z| z.conj()) - &svd.u).norm() <= 1e-10);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(complex_svd(&m).is_err());
    }
}
