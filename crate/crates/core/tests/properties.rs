use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tubal_core::io;
use tubal_core::oracle;
use tubal_core::scalar::{self, TubalScalar};
use tubal_core::tsvd::{self, b_rank, eta_order, tubal_rank, DEFAULT_RANK_TOL};
use tubal_core::{complex_svd, mat_tprod, mat_transpose, CMat, Transform, TubalError, TubalMatrix};

const UNITARY: [&str; 5] = ["ndft", "dct", "orth", "dct-orth", "ndft-orth"];

fn tubes(p: usize, count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, p), count)
}

fn scaled_diff(x: &TubalScalar, y: &TubalScalar, scale: f64) -> f64 {
    x.max_abs_diff(y) / scale.max(1.0)
}

fn random_tensor(m: usize, n: usize, p: usize, seed: u64) -> TubalMatrix {
    TubalMatrix::random(m, n, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `(transform, tensor)` with a unitary builtin and shape up to 6×6×6.
fn unitary_case() -> impl Strategy<Value = (Transform, TubalMatrix)> {
    (0..UNITARY.len(), 1..=6usize, 1..=6usize, 1..=6usize, any::<u64>()).prop_map(|(t, m, n, p, seed)| {
        let l = Transform::builtin(UNITARY[t], p, seed).unwrap();
        (l, random_tensor(m, n, p, seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(t in 0..Transform::BUILTINS.len(), p in 1..=8usize, seed in any::<u64>(), v in tubes(8, 3)) {
        let l = Transform::builtin(Transform::BUILTINS[t], p, seed).unwrap();
        let [a, b, c]: [TubalScalar; 3] = [0, 1, 2].map(|i| v[i][..p].to_vec().into());
        let scale = a.modulus() * b.modulus() * c.modulus();
        let ab = scalar::tprod(&l, &a, &b).unwrap();
        prop_assert!(scaled_diff(&ab, &scalar::tprod(&l, &b, &a).unwrap(), scale) <= 1e-9);
        let left = scalar::tprod(&l, &ab, &c).unwrap();
        let right = scalar::tprod(&l, &a, &scalar::tprod(&l, &b, &c).unwrap()).unwrap();
        prop_assert!(scaled_diff(&left, &right, scale) <= 1e-9);
        let sum = scalar::tprod(&l, &a, &(&b + &c)).unwrap();
        let split = &ab + &scalar::tprod(&l, &a, &c).unwrap();
        prop_assert!(scaled_diff(&sum, &split, scale) <= 1e-9);
        let e = scalar::unit(&l).unwrap();
        prop_assert!(scaled_diff(&scalar::tprod(&l, &a, &e).unwrap(), &a, a.modulus()) <= 1e-10);
    }

    #[test]
    fn dft_product_is_circular_convolution(p in 1..=8usize, v in tubes(8, 2)) {
        let (a, b) = (&v[0][..p], &v[1][..p]);
        let fast = scalar::tprod(&Transform::dft(p).unwrap(), &a.into(), &b.into()).unwrap();
        let slow: TubalScalar = oracle::circ_conv(a, b).unwrap().into();
        prop_assert!(fast.max_abs_diff(&slow) <= 1e-9);
    }

    #[test]
    fn transpose_is_an_involution(t in 0..Transform::BUILTINS.len(), p in 1..=8usize, v in tubes(8, 1)) {
        let l = Transform::builtin(Transform::BUILTINS[t], p, 1).unwrap();
        let a: TubalScalar = v[0][..p].to_vec().into();
        let tt = scalar::transpose_scalar(&l, &scalar::transpose_scalar(&l, &a).unwrap()).unwrap();
        prop_assert!(tt.max_abs_diff(&a) <= 1e-10 * a.modulus().max(1.0));
    }

    #[test]
    fn matrix_product_matches_tube_loop(t in 0..Transform::BUILTINS.len(), m in 1..=4usize, s in 1..=4usize, n in 1..=4usize, p in 1..=5usize, seed in any::<u64>()) {
        let l = Transform::builtin(Transform::BUILTINS[t], p, seed).unwrap();
        let a = random_tensor(m, s, p, seed);
        let b = random_tensor(s, n, p, seed ^ 1);
        let fast = mat_tprod(&l, &a, &b).unwrap();
        let (slow, imag) = oracle::tube_loop_product(&l, &a, &b).unwrap();
        let scale = a.frobenius() * b.frobenius();
        prop_assert!(imag <= 1e-10 * scale.max(1.0));
        prop_assert!(fast.distance(&slow).unwrap() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn product_transpose_reverses(t in 0..UNITARY.len(), m in 1..=4usize, s in 1..=4usize, n in 1..=4usize, p in 1..=5usize, seed in any::<u64>()) {
        let l = Transform::builtin(UNITARY[t], p, seed).unwrap();
        let a = random_tensor(m, s, p, seed);
        let b = random_tensor(s, n, p, seed ^ 2);
        let lhs = mat_transpose(&l, &mat_tprod(&l, &a, &b).unwrap()).unwrap();
        let rhs = mat_tprod(&l, &mat_transpose(&l, &b).unwrap(), &mat_transpose(&l, &a).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-10 * (a.frobenius() * b.frobenius()).max(1.0));
    }

    #[test]
    fn tsvd_reconstructs_with_orthogonal_factors((l, a) in unitary_case()) {
        let f = tsvd::tsvd(&l, &a).unwrap();
        prop_assert!(a.distance(&f.reconstruct().unwrap()).unwrap() <= 1e-8 * a.frobenius());
        prop_assert!(tubal_core::is_orthogonal(&l, &f.u, 1e-8).unwrap());
        prop_assert!(tubal_core::is_orthogonal(&l, &f.v, 1e-8).unwrap());
        prop_assert!(tsvd::validate_s_diagonal(&l, &f.s.to_matrix(), 1e-8).unwrap().all());
    }

    #[test]
    fn spectrum_decay_energy_and_bldg((l, a) in unitary_case()) {
        let sp = tsvd::spectrum(&l, &a, DEFAULT_RANK_TOL).unwrap();
        prop_assert!(sp.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(sp.mu.windows(2).all(|w| w[0] >= w[1]));
        let total = a.frobenius().powi(2);
        let s2: f64 = sp.sigma.iter().map(|x| x * x).sum();
        let m2: f64 = sp.mu.iter().map(|x| x * x).sum();
        prop_assert!((s2 - total).abs() <= 1e-8 * total && (m2 - total).abs() <= 1e-8 * total);
        prop_assert!(sp.tau.windows(2).all(|w| w[0] >= w[1]) && sp.nu.windows(2).all(|w| w[0] >= w[1]));
        let want = oracle::bldg_singular_values(&l, &a).unwrap();
        for (x, y) in sp.mu.iter().zip(&want) {
            prop_assert!((x - y).abs() <= 1e-9 * want[0]);
        }
        prop_assert_eq!(sp.rank_b, oracle::bldg_rank(&l, &a, DEFAULT_RANK_TOL).unwrap());
    }

    #[test]
    fn eta_is_a_bijection(values in prop::collection::vec(prop::collection::vec(0.0..3.0f64, 1..5), 1..5)) {
        let p = values[0].len();
        let values: Vec<Vec<f64>> = values.into_iter().map(|mut r| { r.resize(p, 0.5); r }).collect();
        let (mu, eta) = eta_order(&values);
        let mut seen = vec![false; mu.len()];
        for (i, row) in eta.iter().enumerate() {
            for (k, &pos) in row.iter().enumerate() {
                prop_assert!(!seen[pos]);
                seen[pos] = true;
                prop_assert_eq!(mu[pos], values[i][k]);
            }
        }
        prop_assert!(mu.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn tubal_truncation_errors_and_ranks((l, a) in unitary_case()) {
        let f = tsvd::tsvd(&l, &a).unwrap();
        let sp = f.spectrum(DEFAULT_RANK_TOL).unwrap();
        let mut prev = a.frobenius();
        for i in 1..f.s.diag_len() {
            let ai = tsvd::truncate_tubal(&f, i).unwrap();
            let err = a.distance(&ai).unwrap();
            prop_assert!((err * err - sp.tau[i].powi(2)).abs() <= 1e-7 * sp.tau[i].powi(2) + 1e-12 * a.frobenius().powi(2));
            prop_assert!(err <= prev + 1e-12);
            prop_assert!(tubal_rank(&l, &ai, 1e-8).unwrap() <= i);
            // Keeping p values per kept tube can only do better than keeping whole tubes.
            prop_assert!(sp.nu[(l.p() * i).min(sp.nu.len() - 1)] <= sp.tau[i] + 1e-12);
            prev = err;
        }
    }

    #[test]
    fn brank_truncation_errors_and_ranks((l, a) in unitary_case()) {
        let f = tsvd::tsvd(&l, &a).unwrap();
        let sp = f.spectrum(DEFAULT_RANK_TOL).unwrap();
        let mut prev = a.frobenius();
        for j in 1..f.s.diag_len() * l.p() {
            match tsvd::truncate_brank(&f, j) {
                Ok(aj) => {
                    let err = a.distance(&aj).unwrap();
                    prop_assert!((err * err - sp.nu[j].powi(2)).abs() <= 1e-7 * sp.nu[j].powi(2) + 1e-12 * a.frobenius().powi(2));
                    prop_assert!(err <= prev + 1e-12);
                    prop_assert!(b_rank(&l, &aj, 1e-8).unwrap() <= j);
                    prev = err;
                }
                Err(TubalError::SplitConjugatePair { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn g_part_is_idempotent((l, a) in unitary_case()) {
        let g = tsvd::g_part(&l, &a).unwrap();
        let gg = tsvd::g_part(&l, &g.to_matrix()).unwrap();
        for (x, y) in g.tubes.iter().zip(&gg.tubes) {
            prop_assert!(x.max_abs_diff(y) <= 1e-10 * a.frobenius().max(1.0));
        }
    }

    #[test]
    fn rank_factorization_reconstructs(t in 0..UNITARY.len(), m in 1..=5usize, n in 1..=5usize, k in 1..=3usize, p in 1..=5usize, seed in any::<u64>()) {
        let l = Transform::builtin(UNITARY[t], p, seed).unwrap();
        let a = mat_tprod(&l, &random_tensor(m, k, p, seed), &random_tensor(k, n, p, seed ^ 3)).unwrap();
        let (b, c) = tsvd::rank_factorization(&l, &a, DEFAULT_RANK_TOL).unwrap();
        let r = tubal_rank(&l, &a, DEFAULT_RANK_TOL).unwrap();
        prop_assert!(r <= k.min(m).min(n));
        prop_assert_eq!((b.cols(), c.rows()), (r, r));
        prop_assert!(a.distance(&mat_tprod(&l, &b, &c).unwrap()).unwrap() <= 1e-8 * a.frobenius());
    }

    #[test]
    fn complex_svd_contract(m in 1..=7usize, n in 1..=7usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = TubalMatrix::random(m, n, 2, &mut rng);
        let mat = CMat::from_fn(m, n, |i, j| Complex64::new(x.get(i, j, 0), x.get(i, j, 1)));
        let svd = complex_svd(&mat).unwrap();
        prop_assert!((svd.reconstruct() - &mat).norm() <= 1e-12 * mat.norm().max(1.0));
        prop_assert!((svd.u.adjoint() * &svd.u - CMat::identity(m, m)).norm() <= 1e-12 * m as f64);
        prop_assert!((svd.v.adjoint() * &svd.v - CMat::identity(n, n)).norm() <= 1e-12 * n as f64);
        prop_assert!(svd.d.windows(2).all(|w| w[0] >= w[1]) && svd.d.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn tensor_files_round_trip(m in 1..=4usize, n in 1..=4usize, p in 1..=4usize, seed in any::<u64>()) {
        let a = random_tensor(m, n, p, seed);
        prop_assert_eq!(io::parse_text(&io::to_text(&a)).unwrap(), a.clone());
        prop_assert_eq!(io::parse_binary(&io::to_binary(&a)).unwrap(), a);
    }
}
