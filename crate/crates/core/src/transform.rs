//! Invertible transforms `L` that parameterize the tubal algebra.
//!
//! A [`Transform`] owns `L`, its cached inverse `H = L⁻¹` and a
//! [`TransformClass`] computed once at construction. Classification is
//! numerical: real-preservation is checked on all basis pairs (the product
//! `⊙_L` is bilinear), double real-preservation on all basis vectors (`ψ_L` is
//! linear).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TubalError};
use crate::linalg::CMat;

/// Absolute tolerance on imaginary residuals used by [`classify`].
pub const CLASS_TOL: f64 = 1e-8;

/// Relative tolerance of the inverse-consistency check `‖LH − I‖_F ≤ tol·‖L‖_F`.
pub const INVERSE_TOL: f64 = 1e-10;

/// How complex conjugation acts in the transform domain.
///
/// For real `a`, `conj(L a) = N (L a)` with `N = conj(L)·H`. The variants
/// describe `N`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConjStructure {
    /// `N = I`: `L` is real.
    Identity,
    /// `conj(La)(k) = signs[k] · (La)(perm[k])`.
    SignedPermutation { perm: Vec<usize>, signs: Vec<f64> },
    /// `N` is real but not a signed permutation.
    General(DMatrix<f64>),
    /// `N` has a non-negligible imaginary part.
    NotReal,
}

impl ConjStructure {
    pub fn label(&self) -> &'static str {
        match self {
            ConjStructure::Identity => "identity",
            ConjStructure::SignedPermutation { .. } => "signed-permutation",
            ConjStructure::General(_) => "general",
            ConjStructure::NotReal => "not-real",
        }
    }

    /// The slice pairing `k ↦ π(k)` when conjugation maps slice `k` exactly
    /// onto slice `π(k)` (all signs `+1`, `π` an involution).
    pub fn conjugate_pairing(&self) -> Option<&[usize]> {
        match self {
            ConjStructure::SignedPermutation { perm, signs } => {
                let involution = perm.iter().enumerate().all(|(k, &q)| perm[q] == k);
                let positive = signs.iter().all(|&s| s > 0.0);
                (involution && positive).then_some(perm.as_slice())
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformClass {
    pub is_real_preserving: bool,
    pub is_doubly_real_preserving: bool,
    pub is_unitary: bool,
    pub conj_structure: ConjStructure,
}

#[derive(Debug, Clone)]
pub struct Transform {
    name: String,
    l: CMat,
    h: CMat,
    class: TransformClass,
    /// Real matrix of `ψ_L = H·conj(L)`, present iff doubly real-preserving.
    psi: Option<DMatrix<f64>>,
}

impl Transform {
    /// Builds a transform from an arbitrary square complex matrix.
    pub fn from_matrix(name: impl Into<String>, l: CMat) -> Result<Self> {
        let p = l.nrows();
        if p == 0 {
            return Err(TubalError::InvalidDimension("transform size p must be >= 1".into()));
        }
        if l.ncols() != p {
            return Err(TubalError::DimensionMismatch {
                context: "transform matrix columns",
                expected: p,
                found: l.ncols(),
            });
        }
        if l.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TubalError::InvalidDimension("transform has non-finite entries".into()));
        }
        let h = l
            .clone()
            .try_inverse()
            .ok_or(TubalError::SingularTransform { residual: f64::INFINITY })?;
        Self::with_inverse(name.into(), l, h)
    }

    fn with_inverse(name: String, l: CMat, h: CMat) -> Result<Self> {
        let p = l.nrows();
        let residual = (&l * &h - CMat::identity(p, p)).norm();
        if !residual.is_finite() || residual > INVERSE_TOL * l.norm() {
            return Err(TubalError::SingularTransform { residual });
        }
        let (class, psi) = compute_class(&l, &h);
        Ok(Transform { name, l, h, class, psi })
    }

    /// The DFT matrix `F_{kl} = ω^{kl}` (0-based), `ω = e^{−2πi/p}`, with `H = F^H / p`.
    pub fn dft(p: usize) -> Result<Self> {
        check_p(p)?;
        let w = roots_of_unity(p);
        let l = CMat::from_fn(p, p, |k, j| w[(k * j) % p]);
        let h = l.adjoint() / Complex64::new(p as f64, 0.0);
        Self::with_inverse(format!("dft{p}"), l, h)
    }

    /// The normalized DFT `F / √p`, which is unitary.
    pub fn unitary_dft(p: usize) -> Result<Self> {
        check_p(p)?;
        let w = roots_of_unity(p);
        let s = 1.0 / (p as f64).sqrt();
        let l = CMat::from_fn(p, p, |k, j| w[(k * j) % p] * s);
        let h = l.adjoint();
        Self::with_inverse(format!("ndft{p}"), l, h)
    }

    /// Orthonormal DCT-II: `C[k][j] = √(2/p)·c_k·cos(π(2j+1)k / 2p)`, `c_0 = 1/√2`.
    pub fn dct(p: usize) -> Result<Self> {
        check_p(p)?;
        let pf = p as f64;
        let c = DMatrix::from_fn(p, p, |k, j| {
            let ck = if k == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
            (2.0 / pf).sqrt()
                * ck
                * (std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2.0 * pf)).cos()
        });
        Self::from_real(format!("dct{p}"), c)
    }

    /// Real orthogonal matrix from the QR factorization of a seeded Gaussian
    /// matrix, with columns signed so that `R` has a nonnegative diagonal.
    pub fn random_orthogonal(p: usize, seed: u64) -> Result<Self> {
        check_p(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::<f64>::from_fn(p, p, |_, _| StandardNormal.sample(&mut rng));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for (j, mut col) in q.column_iter_mut().enumerate() {
            if r[(j, j)] < 0.0 {
                col.neg_mut();
            }
        }
        Self::from_real(format!("orth{p}s{seed}"), q)
    }

    pub fn identity(p: usize) -> Result<Self> {
        check_p(p)?;
        Self::from_real(format!("id{p}"), DMatrix::identity(p, p))
    }

    /// Names accepted by [`Transform::builtin`].
    pub const BUILTINS: [&'static str; 7] = ["dft", "ndft", "dct", "orth", "identity", "dct-orth", "ndft-orth"];

    /// Looks up a builtin by name. `seed` only affects the `orth` variants.
    pub fn builtin(name: &str, p: usize, seed: u64) -> Result<Self> {
        match name {
            "dft" => Self::dft(p),
            "ndft" => Self::unitary_dft(p),
            "dct" => Self::dct(p),
            "orth" => Self::random_orthogonal(p, seed),
            "identity" => Self::identity(p),
            "dct-orth" => Self::dct(p)?.compose(&Self::random_orthogonal(p, seed)?),
            "ndft-orth" => Self::unitary_dft(p)?.compose(&Self::random_orthogonal(p, seed)?),
            other => Err(TubalError::Parse(format!(
                "unknown transform {other:?}; expected one of {}",
                Self::BUILTINS.join(", ")
            ))),
        }
    }

    /// Wraps a real orthogonal matrix, using `Qᵀ` as the inverse.
    fn from_real(name: String, q: DMatrix<f64>) -> Result<Self> {
        let h = q.transpose().map(|x| Complex64::new(x, 0.0));
        let l = q.map(|x| Complex64::new(x, 0.0));
        Self::with_inverse(name, l, h)
    }

    /// The product `self · other` with a recomputed classification.
    pub fn compose(&self, other: &Transform) -> Result<Self> {
        if self.p() != other.p() {
            return Err(TubalError::DimensionMismatch {
                context: "compose",
                expected: self.p(),
                found: other.p(),
            });
        }
        let l = &self.l * &other.l;
        let h = &other.h * &self.h;
        Self::with_inverse(format!("{}*{}", self.name, other.name), l, h)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self) -> usize {
        self.l.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.l
    }

    pub fn inverse_matrix(&self) -> &CMat {
        &self.h
    }

    pub fn class(&self) -> &TransformClass {
        &self.class
    }

    /// Real matrix realizing `ψ_L` on real vectors.
    pub fn psi_matrix(&self) -> Option<&DMatrix<f64>> {
        self.psi.as_ref()
    }

    pub fn is_real_preserving(&self) -> bool {
        self.class.is_real_preserving
    }

    pub fn is_doubly_real_preserving(&self) -> bool {
        self.class.is_doubly_real_preserving
    }

    pub fn is_unitary(&self) -> bool {
        self.class.is_unitary
    }

    pub(crate) fn require_real_preserving(&self) -> Result<()> {
        if self.class.is_real_preserving {
            Ok(())
        } else {
            Err(TubalError::NotRealPreserving)
        }
    }

    pub(crate) fn require_doubly_real_preserving(&self) -> Result<&DMatrix<f64>> {
        self.psi.as_ref().ok_or(TubalError::NotDoublyRealPreserving)
    }

    pub(crate) fn require_unitary(&self) -> Result<()> {
        if self.class.is_unitary {
            Ok(())
        } else {
            Err(TubalError::NotUnitary)
        }
    }

    fn check_len(&self, len: usize, context: &'static str) -> Result<()> {
        if len == self.p() {
            Ok(())
        } else {
            Err(TubalError::DimensionMismatch { context, expected: self.p(), found: len })
        }
    }

    /// `φ_L(a) = L a`.
    pub fn forward(&self, a: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(a.len(), "forward transform")?;
        Ok(matvec(&self.l, a))
    }

    /// `φ_L⁻¹(c) = H c`.
    pub fn inverse(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(c.len(), "inverse transform")?;
        Ok(matvec(&self.h, c))
    }

    pub fn forward_real(&self, a: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(a.len(), "forward transform")?;
        Ok(matvec_real(&self.l, a))
    }
}

/// Returns the cached classification of `l`.
pub fn classify(l: &Transform) -> TransformClass {
    l.class.clone()
}

fn check_p(p: usize) -> Result<()> {
    if p == 0 {
        Err(TubalError::InvalidDimension("transform size p must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// `ω^t` for `t = 0..p`, built so that `ω^{p−t} = conj(ω^t)` holds bitwise.
fn roots_of_unity(p: usize) -> Vec<Complex64> {
    let mut w = vec![Complex64::new(1.0, 0.0); p];
    for t in 1..p {
        w[t] = if 2 * t > p {
            w[p - t].conj()
        } else if 2 * t == p {
            Complex64::new(-1.0, 0.0)
        } else if 4 * t == p {
            Complex64::new(0.0, -1.0)
        } else {
            let theta = -2.0 * std::f64::consts::PI * t as f64 / p as f64;
            Complex64::new(theta.cos(), theta.sin())
        };
    }
    w
}

pub(crate) fn matvec(m: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * x[c]).sum())
        .collect()
}

pub(crate) fn matvec_real(m: &CMat, x: &[f64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * x[c]).sum())
        .collect()
}

fn max_abs(z: &[Complex64]) -> f64 {
    z.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn max_imag(z: &[Complex64]) -> f64 {
    z.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
}

fn compute_class(l: &CMat, h: &CMat) -> (TransformClass, Option<DMatrix<f64>>) {
    let p = l.nrows();

    // e_i ⊙_L e_j = H (L[:,i] ∘ L[:,j])
    let mut real_preserving = true;
    'pairs: for i in 0..p {
        for j in i..p {
            let had: Vec<Complex64> = (0..p).map(|k| l[(k, i)] * l[(k, j)]).collect();
            let prod = matvec(h, &had);
            if max_imag(&prod) > CLASS_TOL * max_abs(&prod).max(1.0) {
                real_preserving = false;
                break 'pairs;
            }
        }
    }

    let psi_c = h * l.map(|z| z.conj());
    let psi_real = max_imag(psi_c.as_slice()) <= CLASS_TOL * max_abs(psi_c.as_slice()).max(1.0);
    let doubly = real_preserving && psi_real;
    let psi = doubly.then(|| psi_c.map(|z| z.re));

    let gram = l.adjoint() * l;
    let is_unitary = (gram - CMat::identity(p, p)).norm() <= CLASS_TOL;

    let n = l.map(|z| z.conj()) * h;
    let conj_structure = conj_structure_of(&n);

    (
        TransformClass {
            is_real_preserving: real_preserving,
            is_doubly_real_preserving: doubly,
            is_unitary,
            conj_structure,
        },
        psi,
    )
}

fn conj_structure_of(n: &CMat) -> ConjStructure {
    let p = n.nrows();
    let near_identity = (0..p).all(|r| {
        (0..p).all(|c| {
            let target = if r == c { 1.0 } else { 0.0 };
            (n[(r, c)] - Complex64::new(target, 0.0)).norm() <= CLASS_TOL
        })
    });
    if near_identity {
        return ConjStructure::Identity;
    }

    let mut perm = Vec::with_capacity(p);
    let mut signs = Vec::with_capacity(p);
    let mut used = vec![false; p];
    let mut is_perm = true;
    for r in 0..p {
        let (c, _) = (0..p)
            .map(|c| (c, n[(r, c)].norm()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        let v = n[(r, c)];
        let sign = if v.re >= 0.0 { 1.0 } else { -1.0 };
        let pivot_ok = (v - Complex64::new(sign, 0.0)).norm() <= CLASS_TOL;
        let rest_ok = (0..p).filter(|&q| q != c).all(|q| n[(r, q)].norm() <= CLASS_TOL);
        if !pivot_ok || !rest_ok || used[c] {
            is_perm = false;
            break;
        }
        used[c] = true;
        perm.push(c);
        signs.push(sign);
    }
    if is_perm {
        return ConjStructure::SignedPermutation { perm, signs };
    }

    if max_imag(n.as_slice()) <= CLASS_TOL * max_abs(n.as_slice()).max(1.0) {
        ConjStructure::General(n.map(|z| z.re))
    } else {
        ConjStructure::NotReal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn dft_small_cases() {
        let f1 = Transform::dft(1).unwrap();
        assert_eq!(f1.matrix()[(0, 0)], c(1.0, 0.0));

        let f2 = Transform::dft(2).unwrap();
        let expected = [[1.0, 1.0], [1.0, -1.0]];
        for r in 0..2 {
            for s in 0..2 {
                assert!(close(f2.matrix()[(r, s)], c(expected[r][s], 0.0), 1e-15));
            }
        }
    }

    #[test]
    fn dft4_entry_matches_direct_power() {
        // 1-based entry (2,4) is ω^{1·3}; evaluated independently via exp.
        let f4 = Transform::dft(4).unwrap();
        let theta = -2.0 * std::f64::consts::PI * 3.0 / 4.0;
        let direct = c(theta.cos(), theta.sin());
        assert!(close(f4.matrix()[(1, 3)], direct, 1e-15));
        assert!(close(f4.matrix()[(1, 3)], c(0.0, 1.0), 1e-15));
    }

    #[test]
    fn dft_forward_matches_direct_sum() {
        let f3 = Transform::dft(3).unwrap();
        let a = [1.0, 2.0, 3.0];
        let got = f3.forward_real(&a).unwrap();
        for (l, g) in got.iter().enumerate() {
            let want: Complex64 = (0..3)
                .map(|i| {
                    let th = -2.0 * std::f64::consts::PI * (i * l) as f64 / 3.0;
                    c(th.cos(), th.sin()) * a[i]
                })
                .sum();
            assert!(close(*g, want, 1e-12));
        }
    }

    #[test]
    fn forward_basis_and_inverse_of_ones() {
        let f = Transform::dft(5).unwrap();
        let mut e1 = vec![c(0.0, 0.0); 5];
        e1[0] = c(1.0, 0.0);
        for z in f.forward(&e1).unwrap() {
            assert!(close(z, c(1.0, 0.0), 1e-15));
        }
        let back = f.inverse(&[c(1.0, 0.0); 5]).unwrap();
        for (k, z) in back.iter().enumerate() {
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!(close(*z, c(want, 0.0), 1e-14));
        }
    }

    #[test]
    fn unitary_dft_round_trip_and_class() {
        let u1 = Transform::unitary_dft(1).unwrap();
        assert_eq!(u1.matrix()[(0, 0)], c(1.0, 0.0));
        assert!(Transform::unitary_dft(4).unwrap().is_unitary());

        let u3 = Transform::unitary_dft(3).unwrap();
        let a: Vec<Complex64> = [1.0, 2.0, 3.0].iter().map(|&x| c(x, 0.0)).collect();
        let back = u3.inverse(&u3.forward(&a).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&back) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn dct_values_and_orthogonality() {
        assert!(close(Transform::dct(1).unwrap().matrix()[(0, 0)], c(1.0, 0.0), 1e-15));
        let d2 = Transform::dct(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[s, s], [s, -s]];
        for r in 0..2 {
            for q in 0..2 {
                assert!(close(d2.matrix()[(r, q)], c(expected[r][q], 0.0), 1e-15));
            }
        }
        for p in 1..=8 {
            let d = Transform::dct(p).unwrap();
            let err = (d.matrix().adjoint() * d.matrix() - CMat::identity(p, p)).norm();
            assert!(err <= 1e-12, "p={p} err={err}");
            let cl = d.class();
            assert!(cl.is_unitary && cl.is_doubly_real_preserving);
            assert_eq!(cl.conj_structure, ConjStructure::Identity);
        }
    }

    #[test]
    fn random_orthogonal_is_deterministic_and_orthogonal() {
        let q1 = Transform::random_orthogonal(1, 3).unwrap();
        assert!((q1.matrix()[(0, 0)].re.abs() - 1.0).abs() < 1e-15);

        let a = Transform::random_orthogonal(5, 7).unwrap();
        let b = Transform::random_orthogonal(5, 7).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let err = (a.matrix().adjoint() * a.matrix() - CMat::identity(5, 5)).norm();
        assert!(err <= 1e-12);
        assert!(a.is_unitary() && a.is_doubly_real_preserving());
        assert_ne!(a.matrix(), Transform::random_orthogonal(5, 8).unwrap().matrix());
    }

    #[test]
    fn dft_classification() {
        for p in 1..=7 {
            let f = Transform::dft(p).unwrap();
            let cl = f.class();
            assert!(cl.is_real_preserving && cl.is_doubly_real_preserving, "p={p}");
            assert_eq!(cl.is_unitary, p == 1);
            match &cl.conj_structure {
                ConjStructure::SignedPermutation { perm, signs } => {
                    for k in 0..p {
                        assert_eq!(perm[k], (p - k) % p);
                        assert_eq!(signs[k], 1.0);
                    }
                }
                ConjStructure::Identity => assert!(p <= 2),
                other => panic!("p={p}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn imaginary_identity_is_not_real_preserving() {
        let l = CMat::from_diagonal_element(2, 2, c(0.0, 1.0));
        let t = Transform::from_matrix("iI", l).unwrap();
        assert!(!t.is_real_preserving());
        assert!(!t.is_doubly_real_preserving());
    }

    #[test]
    fn compose_with_identity_and_orthogonal() {
        let f = Transform::dft(3).unwrap();
        let fi = f.compose(&Transform::identity(3).unwrap()).unwrap();
        assert!((fi.matrix() - f.matrix()).norm() < 1e-15);

        let q = Transform::random_orthogonal(3, 11).unwrap();
        let fq = f.compose(&q).unwrap();
        assert!(fq.is_real_preserving() && fq.is_doubly_real_preserving());
        // Conjugation still pairs slices k and p−k.
        assert!(fq.class().conj_structure.conjugate_pairing().is_some());
    }

    #[test]
    fn compose_rejects_mismatched_sizes() {
        let err = Transform::dft(3).unwrap().compose(&Transform::dft(4).unwrap()).unwrap_err();
        assert!(matches!(err, TubalError::DimensionMismatch { .. }));
    }

    #[test]
    fn zero_size_and_singular_inputs() {
        assert!(matches!(Transform::dft(0), Err(TubalError::InvalidDimension(_))));
        assert!(matches!(Transform::dct(0), Err(TubalError::InvalidDimension(_))));
        let sing = CMat::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(
            Transform::from_matrix("ones", sing),
            Err(TubalError::SingularTransform { .. })
        ));
    }

    #[test]
    fn forward_rejects_wrong_length() {
        let f = Transform::dft(3).unwrap();
        assert!(matches!(f.forward_real(&[1.0, 2.0]), Err(TubalError::DimensionMismatch { .. })));
    }

    #[test]
    fn psi_matrix_of_real_transform_is_identity() {
        let q = Transform::random_orthogonal(4, 1).unwrap();
        let psi = q.psi_matrix().unwrap();
        assert!((psi - DMatrix::<f64>::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn builtin_lookup() {
        for name in Transform::BUILTINS {
            let t = Transform::builtin(name, 4, 7).unwrap();
            assert_eq!(t.p(), 4);
            assert!(t.is_doubly_real_preserving(), "{name}");
            assert_eq!(t.is_unitary(), name != "dft", "{name}");
        }
        let pair = Transform::builtin("ndft-orth", 5, 1).unwrap();
        assert_eq!(pair.class().conj_structure, Transform::dft(5).unwrap().class().conj_structure);
        assert!(matches!(Transform::builtin("fft", 4, 0), Err(TubalError::Parse(_))));
    }
}
