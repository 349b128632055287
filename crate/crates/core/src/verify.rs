//! Desk-scale property suites with a machine-readable report.
//!
//! Every check records the achieved quantity next to its threshold. Reports
//! contain no timings, so a fixed seed gives byte-identical JSON.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Result, TubalError};
use crate::linalg::{mat_tprod, mat_transpose, orthogonality_defect, TubalMatrix};
use crate::oracle::{self, CompetitorMode, CompetitorSpec};
use crate::scalar::{self, modulus, TubalScalar};
use crate::transform::{ConjStructure, Transform};
use crate::tsvd::{self, SDiagonal, DEFAULT_RANK_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Ring,
    Transform,
    Tsvd,
    EckartYoung,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Ring => "ring",
            Suite::Transform => "transform",
            Suite::Tsvd => "tsvd",
            Suite::EckartYoung => "eckart-young",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = TubalError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ring" => Suite::Ring,
            "transform" => Suite::Transform,
            "tsvd" => Suite::Tsvd,
            "eckart-young" => Suite::EckartYoung,
            "all" => Suite::All,
            _ => return Err(TubalError::Parse(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub achieved: f64,
    /// `"<="` or `">="`: how `achieved` must compare with `threshold`.
    pub relation: &'static str,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    fn new(suite: &str, seed: u64, checks: Vec<CheckResult>) -> Self {
        VerifyReport { suite: suite.into(), seed, passed: checks.iter().all(|c| c.passed), checks }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

struct Recorder {
    suite: &'static str,
    checks: Vec<CheckResult>,
}

impl Recorder {
    fn new(suite: &'static str) -> Self {
        Recorder { suite, checks: Vec::new() }
    }

    /// Passes iff `achieved ≤ threshold` (NaN fails).
    fn le(&mut self, name: impl Into<String>, achieved: f64, threshold: f64) {
        self.push(name.into(), achieved <= threshold, achieved, "<=", threshold);
    }

    fn ge(&mut self, name: impl Into<String>, achieved: f64, threshold: f64) {
        self.push(name.into(), achieved >= threshold, achieved, ">=", threshold);
    }

    fn push(&mut self, name: String, passed: bool, achieved: f64, relation: &'static str, threshold: f64) {
        self.checks.push(CheckResult { suite: self.suite, name, passed, achieved, relation, threshold, error: None });
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.le(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    /// Runs a fallible block; an error becomes a failing check under `name`.
    fn guard(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.checks.push(CheckResult {
                suite: self.suite,
                name: name.into(),
                passed: false,
                achieved: f64::INFINITY,
                relation: "<=",
                threshold: 0.0,
                error: Some(e.to_string()),
            });
        }
    }
}

fn normal_vec(p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..p).map(|_| StandardNormal.sample(rng)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `P·F₃` with `P` mixing the first two coordinates: invertible but not
/// real-preserving.
pub fn rotated_dft3() -> Result<Transform> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let p = DMatrix::from_row_slice(3, 3, &[s, s, 0.0, s, -s, 0.0, 0.0, 0.0, 1.0]);
    let p = Transform::from_matrix("P", p.map(|x| Complex64::new(x, 0.0)))?;
    Ok(p.compose(&Transform::dft(3)?)?.with_name("pf3"))
}

fn unitary_transforms(p: usize, seed: u64) -> Result<Vec<Transform>> {
    ["ndft", "dct", "orth", "dct-orth"].iter().map(|n| Transform::builtin(n, p, seed)).collect()
}

fn ring_suite(seed: u64) -> Vec<CheckResult> {
    let mut r = Recorder::new("ring");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    r.guard("dft_product_vs_circ_conv", |r| {
        let (mut worst, mut unit_err, mut flip_err) = (0.0f64, 0.0f64, 0.0f64);
        for p in 1..=8 {
            let f = Transform::dft(p)?;
            for _ in 0..25 {
                let a = normal_vec(p, &mut rng);
                let b = normal_vec(p, &mut rng);
                let fast = scalar::tprod(&f, &a.clone().into(), &b.clone().into())?;
                worst = worst.max(max_diff(fast.as_slice(), &oracle::circ_conv(&a, &b)?));
                let at = scalar::transpose_scalar(&f, &a.clone().into())?;
                let flipped: Vec<f64> = (0..p).map(|k| a[(p - k) % p]).collect();
                flip_err = flip_err.max(max_diff(at.as_slice(), &flipped));
            }
            unit_err = unit_err.max(max_diff(scalar::unit(&f)?.as_slice(), TubalScalar::basis(p, 0).as_slice()));
        }
        r.le("dft_product_vs_circ_conv", worst, 1e-9);
        r.le("dft_unit_is_e1", unit_err, 1e-12);
        r.le("dft_transpose_is_flip", flip_err, 1e-12);
        Ok(())
    });

    for name in Transform::BUILTINS {
        r.guard(&format!("{name}_ring_axioms"), |r| {
            let (mut comm, mut assoc, mut dist, mut inv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for p in [1, 2, 3, 5, 8] {
                let l = Transform::builtin(name, p, seed)?;
                let e = scalar::unit(&l)?;
                for _ in 0..10 {
                    let a: TubalScalar = normal_vec(p, &mut rng).into();
                    let b: TubalScalar = normal_vec(p, &mut rng).into();
                    let c: TubalScalar = normal_vec(p, &mut rng).into();
                    let scale = (modulus(&a) * modulus(&b) * modulus(&c)).max(1.0);
                    let ab = scalar::tprod(&l, &a, &b)?;
                    comm = comm.max(ab.max_abs_diff(&scalar::tprod(&l, &b, &a)?) / scale);
                    let left = scalar::tprod(&l, &ab, &c)?;
                    let right = scalar::tprod(&l, &a, &scalar::tprod(&l, &b, &c)?)?;
                    assoc = assoc.max(left.max_abs_diff(&right) / scale);
                    let sum = scalar::tprod(&l, &a, &(&b + &c))?;
                    let split = &ab + &scalar::tprod(&l, &a, &c)?;
                    dist = dist.max(sum.max_abs_diff(&split) / scale);
                    match scalar::invert(&l, &a) {
                        Ok(ai) => {
                            let one = scalar::tprod(&l, &a, &ai)?;
                            inv = inv.max(one.max_abs_diff(&e) / modulus(&e).max(1.0));
                        }
                        Err(TubalError::NotInvertible { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            r.le(format!("{name}_commutative"), comm, 1e-9);
            r.le(format!("{name}_associative"), assoc, 1e-9);
            r.le(format!("{name}_distributive"), dist, 1e-9);
            r.le(format!("{name}_inverse_gives_unit"), inv, 1e-8);
            Ok(())
        });
    }

    r.guard("norm_inequalities", |r| {
        let (mut scal, mut mat, mut orth) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0f64);
        for l in unitary_transforms(4, seed)? {
            for _ in 0..10 {
                let a: TubalScalar = normal_vec(4, &mut rng).into();
                let b: TubalScalar = normal_vec(4, &mut rng).into();
                let ab = scalar::tprod(&l, &a, &b)?;
                scal = scal.max(modulus(&ab) - modulus(&a) * modulus(&b));
                let x = TubalMatrix::random(3, 2, 4, &mut rng);
                let y = TubalMatrix::random(2, 3, 4, &mut rng);
                mat = mat.max(mat_tprod(&l, &x, &y)?.frobenius() - x.frobenius() * y.frobenius());
                let q = tsvd::tsvd(&l, &TubalMatrix::random(3, 3, 4, &mut rng))?.u;
                orth = orth.max((mat_tprod(&l, &q, &x)?.frobenius() - x.frobenius()).abs());
            }
        }
        r.le("scalar_modulus_excess", scal, 1e-9);
        r.le("frobenius_product_excess", mat, 1e-9);
        r.le("orthogonal_preserves_frobenius", orth, 1e-9);
        Ok(())
    });

    r.checks
}

fn transform_suite(seed: u64) -> Vec<CheckResult> {
    let mut r = Recorder::new("transform");

    r.guard("dft_direct_sum", |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for p in 1..=8 {
            let f = Transform::dft(p)?;
            let a = normal_vec(p, &mut rng);
            let fast = f.forward_real(&a)?;
            for (k, z) in fast.iter().enumerate() {
                let direct: Complex64 = (0..p)
                    .map(|t| Complex64::from_polar(a[t], -2.0 * PI * (k * t) as f64 / p as f64))
                    .sum();
                worst = worst.max((z - direct).norm());
            }
        }
        r.le("dft_direct_sum", worst, 1e-12);
        Ok(())
    });

    r.guard("classification", |r| {
        let d3 = Transform::dft(3)?;
        r.flag("dft3_real_preserving_not_unitary", d3.is_doubly_real_preserving() && !d3.is_unitary());
        let n5 = Transform::unitary_dft(5)?;
        r.flag("ndft5_unitary_doubly_real", n5.is_unitary() && n5.is_doubly_real_preserving());
        let real_ok = (1..=8).all(|p| {
            ["dct", "orth", "dct-orth"].iter().all(|n| {
                Transform::builtin(n, p, seed).is_ok_and(|t| {
                    t.is_unitary() && t.is_doubly_real_preserving() && t.class().conj_structure == ConjStructure::Identity
                })
            })
        });
        r.flag("real_builtins_unitary_identity_conj", real_ok);
        // For p ≤ 2 the flip is the identity and F is real.
        let flip_ok = (1..=8).all(|p| {
            Transform::dft(p).is_ok_and(|f| match &f.class().conj_structure {
                ConjStructure::Identity => p <= 2,
                c => c.conjugate_pairing().is_some_and(|perm| (0..p).all(|k| perm[k] == (p - k) % p)),
            })
        });
        r.flag("dft_conj_is_index_flip", flip_ok);
        let pf = rotated_dft3()?;
        r.flag("rotated_dft3_not_real_preserving", !pf.is_real_preserving());
        Ok(())
    });

    r.guard("rotated_dft3_product", |r| {
        let pf = rotated_dft3()?;
        let a = [1.0, 2.0, 3.0].map(|x| Complex64::new(x, 0.0));
        let b = [3.0, 4.0, 5.0].map(|x| Complex64::new(x, 0.0));
        let got = scalar::tprod_complex(&pf, &a, &b)?;
        let want = [(11.4602, 3.9279), (17.8241, -8.8269), (22.6881, 3.0619)];
        let worst = got
            .iter()
            .zip(want)
            .map(|(z, (re, im))| (z.re - re).abs().max((z.im - im).abs()))
            .fold(0.0, f64::max);
        r.le("rotated_dft3_product", worst, 5e-4);
        Ok(())
    });

    r.checks
}

fn tsvd_suite(seed: u64) -> Vec<CheckResult> {
    let mut r = Recorder::new("tsvd");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ["ndft", "dct", "orth", "dct-orth"];

    r.guard("factorization", |r| {
        let (mut recon, mut orth, mut decay, mut energy, mut mu_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut not_sdiag = 0usize;
        for trial in 0..24 {
            let name = names[trial % names.len()];
            let (m, n, p) = (1 + trial % 6, 1 + (trial * 5) % 7, 1 + (trial * 3) % 8);
            let l = Transform::builtin(name, p, seed.wrapping_add(trial as u64))?;
            let a = TubalMatrix::random(m, n, p, &mut rng);
            let f = tsvd::tsvd(&l, &a)?;
            let norm = a.frobenius();
            recon = recon.max(rel(a.distance(&f.reconstruct()?)?, norm));
            orth = orth.max(orthogonality_defect(&l, &f.u)?).max(orthogonality_defect(&l, &f.v)?);
            if matches!(name, "ndft") || l.class().conj_structure == ConjStructure::Identity {
                not_sdiag += usize::from(!tsvd::validate_s_diagonal(&l, &f.s.to_matrix(), 1e-8)?.all());
            }
            let sp = f.spectrum(DEFAULT_RANK_TOL)?;
            decay = decay.max(sp.sigma.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max));
            let s2: f64 = sp.sigma.iter().map(|x| x * x).sum();
            let m2: f64 = sp.mu.iter().map(|x| x * x).sum();
            energy = energy.max(rel((s2 - norm * norm).abs(), norm * norm)).max(rel((m2 - norm * norm).abs(), norm * norm));
            let want = oracle::bldg_singular_values(&l, &a)?;
            let top = want.first().copied().unwrap_or(0.0);
            mu_err = mu_err.max(rel(max_diff(&sp.mu, &want), top));
        }
        r.le("reconstruction_relative", recon, 1e-8);
        r.le("factors_orthogonal", orth, 1e-8);
        r.le("s_diagonal_failures", not_sdiag as f64, 0.0);
        r.le("sigma_nonincreasing", decay, 1e-12);
        r.le("energy_identity_relative", energy, 1e-8);
        r.le("mu_vs_bldg_svd_relative", mu_err, 1e-9);
        Ok(())
    });

    r.guard("g_orthogonal_invariance", |r| {
        let mut worst = 0.0f64;
        for trial in 0..8 {
            let l = Transform::builtin(names[trial % names.len()], 3, seed)?;
            let a = TubalMatrix::random(3, 2, 3, &mut rng);
            let y = tsvd::tsvd(&l, &TubalMatrix::random(3, 3, 3, &mut rng))?.u;
            let z = tsvd::tsvd(&l, &TubalMatrix::random(2, 2, 3, &mut rng))?.u;
            let b = mat_tprod(&l, &mat_tprod(&l, &y, &a)?, &mat_transpose(&l, &z)?)?;
            worst = worst.max(rel(g_distance(&tsvd::g_part(&l, &a)?, &tsvd::g_part(&l, &b)?), a.frobenius()));
        }
        r.le("g_orthogonal_invariance", worst, 1e-8);
        Ok(())
    });

    r.guard("rank_factorization", |r| {
        let (mut recon, mut rank_mismatch, mut subrank) = (0.0f64, 0usize, 0usize);
        for trial in 0..8 {
            let l = Transform::builtin(names[trial % names.len()], 4, seed)?;
            let k = 1 + trial % 3;
            let x = TubalMatrix::random(5, k, 4, &mut rng);
            let y = TubalMatrix::random(k, 4, 4, &mut rng);
            let a = mat_tprod(&l, &x, &y)?;
            let (b, c) = tsvd::rank_factorization(&l, &a, DEFAULT_RANK_TOL)?;
            recon = recon.max(rel(a.distance(&mat_tprod(&l, &b, &c)?)?, a.frobenius()));
            let ra = tsvd::tubal_rank(&l, &a, DEFAULT_RANK_TOL)?;
            let rb = tsvd::tubal_rank(&l, &b, DEFAULT_RANK_TOL)?;
            let rc = tsvd::tubal_rank(&l, &c, DEFAULT_RANK_TOL)?;
            rank_mismatch += usize::from(ra != rb || ra != rc);
            let rx = tsvd::tubal_rank(&l, &x, DEFAULT_RANK_TOL)?;
            let ry = tsvd::tubal_rank(&l, &y, DEFAULT_RANK_TOL)?;
            subrank += usize::from(ra > rx.min(ry));
        }
        r.le("rank_factorization_relative", recon, 1e-8);
        r.le("rank_factorization_rank_mismatches", rank_mismatch as f64, 0.0);
        r.le("product_rank_exceeds_factor_rank", subrank as f64, 0.0);
        Ok(())
    });

    r.checks
}

fn g_distance(a: &SDiagonal, b: &SDiagonal) -> f64 {
    a.tubes
        .iter()
        .zip(&b.tubes)
        .map(|(x, y)| x.max_abs_diff(y))
        .fold(0.0, f64::max)
}

fn eckart_young_suite(seed: u64) -> Vec<CheckResult> {
    let mut r = Recorder::new("eckart-young");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    r.guard("tubal_truncation", |r| {
        let (mut ident, mut margin, mut evaluated) = (0.0f64, f64::INFINITY, 0usize);
        for (trial, name) in ["ndft", "dct", "orth", "dct-orth"].iter().enumerate() {
            let l = Transform::builtin(name, 4, seed)?;
            let a = TubalMatrix::random(4, 3, 4, &mut rng);
            let f = tsvd::tsvd(&l, &a)?;
            let sp = f.spectrum(DEFAULT_RANK_TOL)?;
            for i in 1..3 {
                let ai = tsvd::truncate_tubal(&f, i)?;
                let err2 = a.distance(&ai)?.powi(2);
                ident = ident.max(rel((err2 - sp.tau[i].powi(2)).abs(), sp.tau[i].powi(2)));
                let spec = CompetitorSpec::new(CompetitorMode::Tubal, i, 200, seed ^ (trial as u64 * 31 + i as u64));
                let rep = oracle::random_search_optimality(&l, &a, &ai, &spec)?;
                margin = margin.min(rep.worst_margin);
                evaluated += rep.evaluated;
            }
        }
        r.le("tubal_error_identity_relative", ident, 1e-6);
        r.ge("tubal_competitor_margin", margin, -oracle::DOMINANCE_SLACK);
        r.ge("tubal_competitors_evaluated", evaluated as f64, 1.0);
        Ok(())
    });

    r.guard("brank_truncation", |r| {
        let (mut ident, mut fold, mut margin, mut cases) = (0.0f64, 0.0f64, f64::INFINITY, 0usize);
        for (trial, name) in ["ndft", "dct", "orth"].iter().enumerate() {
            let l = Transform::builtin(name, 3, seed)?;
            let a = TubalMatrix::random(3, 3, 3, &mut rng);
            let f = tsvd::tsvd(&l, &a)?;
            let sp = f.spectrum(DEFAULT_RANK_TOL)?;
            for j in 1..9 {
                let aj = match tsvd::truncate_brank(&f, j) {
                    Ok(aj) => aj,
                    Err(TubalError::SplitConjugatePair { .. }) => continue,
                    Err(e) => return Err(e),
                };
                cases += 1;
                let err2 = a.distance(&aj)?.powi(2);
                ident = ident.max(rel((err2 - sp.nu[j].powi(2)).abs(), sp.nu[j].powi(2)));
                if sp.mu[j - 1] - sp.mu[j] > 1e-6 {
                    let (folded, _, _) = oracle::bldg_best_brank(&l, &a, j)?;
                    fold = fold.max(rel(folded.distance(&aj)?, a.frobenius()));
                }
                if j % 3 == 1 {
                    let spec = CompetitorSpec::new(CompetitorMode::Brank, j, 100, seed ^ (trial as u64 * 17 + j as u64));
                    margin = margin.min(oracle::random_search_optimality(&l, &a, &aj, &spec)?.worst_margin);
                }
            }
        }
        r.le("brank_error_identity_relative", ident, 1e-6);
        r.le("brank_vs_folded_bldg_relative", fold, 1e-8);
        r.ge("brank_competitor_margin", margin, -oracle::DOMINANCE_SLACK);
        r.ge("brank_cases_checked", cases as f64, 1.0);
        Ok(())
    });

    r.checks
}

/// Runs one suite (or all of them) at desk scale.
pub fn run_suite(suite: Suite, seed: u64) -> VerifyReport {
    let checks = match suite {
        Suite::Ring => ring_suite(seed),
        Suite::Transform => transform_suite(seed),
        Suite::Tsvd => tsvd_suite(seed),
        Suite::EckartYoung => eckart_young_suite(seed),
        Suite::All => [ring_suite(seed), transform_suite(seed), tsvd_suite(seed), eckart_young_suite(seed)].concat(),
    };
    VerifyReport::new(suite.name(), seed, checks)
}

/// Checks stored factors against the tensor they claim to factorize.
pub fn check_factors(
    l: &Transform,
    a: &TubalMatrix,
    u: &TubalMatrix,
    s: &TubalMatrix,
    v: &TubalMatrix,
    tol: f64,
) -> VerifyReport {
    let mut r = Recorder::new("factors");
    r.guard("factor_shapes", |r| {
        let (m, n, p) = a.shape();
        let ok = u.shape() == (m, m, p) && s.shape() == (m, n, p) && v.shape() == (n, n, p);
        r.flag("factor_shapes", ok);
        if !ok {
            return Ok(());
        }
        let back = mat_tprod(l, &mat_tprod(l, u, s)?, &mat_transpose(l, v)?)?;
        r.le("reconstruction", rel(a.distance(&back)?, a.frobenius()), tol);
        r.le("u_orthogonal", orthogonality_defect(l, u)?, tol);
        r.le("v_orthogonal", orthogonality_defect(l, v)?, tol);
        let rep = tsvd::validate_s_diagonal(l, s, tol)?;
        r.le("s_offdiag_zero", rep.worst_offdiag, tol);
        r.le("s_symmetric", rep.worst_asymmetry, tol);
        r.le("s_psd", rep.worst_negativity, tol);
        r.le("s_ordered", rep.worst_disorder, tol);
        let sigma: Vec<f64> = (0..m.min(n)).map(|i| modulus(&s.entry(i, i))).collect();
        r.le("sigma_nonincreasing", sigma.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max), 1e-12 * a.frobenius().max(1.0));
        Ok(())
    });
    VerifyReport::new("factors", 0, r.checks)
}
