//! Self-check suites behind the verify subcommand. The small tier proves
//! the exact laws by exhaustive enumeration at tiny digit precision; the
//! full tier adds seeded Monte Carlo checks at production precision. All
//! randomness descends from one seed, so a run is reproducible bit for bit.

use std::sync::Arc;

use anyhow::Result;
use medianqmc::gf2::{matvec, BitMatrix, BitVectorE};
use medianqmc::netgen::{
    randomize, randomize_with_precision, GeneratingMatrixSet, RandomizationScheme, RandomizedNet,
};
use medianqmc::rng::{CounterRng, SeedTree};
use medianqmc::theory::{b_set_size, enumerate_k_u_t, k_set_size_bound, KappaSet, SmoothnessParams};
use medianqmc::walsh::{
    s_sign, verify_error_decomposition, wal_multi_codes, z_indicator, FiniteSpectrum, WalshIndex,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Small,
    Full,
}

impl Tier {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "small" => Ok(Tier::Small),
            "full" => Ok(Tier::Full),
            other => anyhow::bail!("unknown tier {other:?} (expected small or full)"),
        }
    }
}

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_verify(tier: Tier, seed: u64) -> Result<VerifyReport> {
    let tree = SeedTree::new(seed);
    let mut checks = vec![
        check_gf2_linearity(),
        check_shift_sign_laws(),
        check_crd_aliasing_exact(),
        check_net_mean_is_z_times_s(),
        check_error_decomposition(&tree.child(0), 50)?,
        check_protected_set_bound(),
        check_truncation_family_sizes(),
        check_stratification()?,
    ];
    if tier == Tier::Full {
        checks.push(check_crd_aliasing_monte_carlo(&tree.child(1)));
        checks.push(check_shift_unbiasedness()?);
        checks.push(check_error_decomposition_production(&tree.child(2), 100)?);
    }
    Ok(VerifyReport { checks })
}

fn low_mask(e: u32) -> u64 {
    if e == 64 {
        u64::MAX
    } else {
        (1 << e) - 1
    }
}

fn result(name: &'static str, failures: usize, cases: usize, note: String) -> CheckResult {
    CheckResult {
        name,
        passed: failures == 0,
        detail: if failures == 0 {
            format!("{cases} cases; {note}")
        } else {
            format!("{failures} of {cases} cases failed; {note}")
        },
    }
}

/// GF(2) matrix action is linear: exhaustive over every matrix and every
/// vector pair at sizes up to 3x3.
fn check_gf2_linearity() -> CheckResult {
    let mut cases = 0usize;
    let mut failures = 0usize;
    for e in 1u32..=3 {
        for m in 1u32..=3 {
            for bits in 0..1u64 << (e * m) {
                let mat = BitMatrix::from_cols(
                    (0..m).map(|j| bits >> (j * e) & low_mask(e)).collect(),
                    e,
                );
                for x in 0..1u64 << m {
                    for y in 0..1u64 << m {
                        cases += 1;
                        let xv = BitVectorE::new(x, m);
                        let yv = BitVectorE::new(y, m);
                        let lhs = matvec(&mat, xv.xor(&yv));
                        let rhs = matvec(&mat, xv).xor(&matvec(&mat, yv));
                        if lhs.bits() != rhs.bits() {
                            failures += 1;
                        }
                    }
                }
            }
        }
    }
    result("gf2-linearity", failures, cases, "A(x+y) = Ax+Ay over all matrices, e,m <= 3".into())
}

/// Digital-shift sign laws, exhaustive at 3-digit precision in dimensions
/// 1 and 2: each mode's sign averages to zero over all shifts, and
/// distinct modes' signs are uncorrelated.
fn check_shift_sign_laws() -> CheckResult {
    let e = 3u32;
    let mut cases = 0usize;
    let mut failures = 0usize;
    for s in 1u32..=2 {
        let digits = e * s;
        let modes: Vec<Vec<u64>> = (1..1u64 << digits)
            .map(|packed| (0..s).map(|j| packed >> (j * e) & low_mask(e)).collect())
            .collect();
        let shifts: Vec<Vec<BitVectorE>> = (0..1u64 << digits)
            .map(|packed| {
                (0..s)
                    .map(|j| BitVectorE::new(packed >> (j * e) & low_mask(e), e))
                    .collect()
            })
            .collect();
        for (a, ka) in modes.iter().enumerate() {
            let idx_a = WalshIndex::new(ka.clone());
            let sum: i64 = shifts.iter().map(|d| s_sign(&idx_a, d) as i64).sum();
            cases += 1;
            if sum != 0 {
                failures += 1;
            }
            for kb in modes.iter().skip(a + 1) {
                let idx_b = WalshIndex::new(kb.clone());
                let corr: i64 = shifts
                    .iter()
                    .map(|d| (s_sign(&idx_a, d) * s_sign(&idx_b, d)) as i64)
                    .sum();
                cases += 1;
                if corr != 0 {
                    failures += 1;
                }
            }
        }
    }
    result(
        "shift-sign-laws",
        failures,
        cases,
        "E[S] = 0 and E[S S'] = 0 exactly, all shifts, E = 3, s <= 2".into(),
    )
}

/// Completely random design kills each nonzero mode with probability
/// exactly 2^-m: exhaustive over all 64 matrices at E = 3, m = 2, s = 1.
fn check_crd_aliasing_exact() -> CheckResult {
    let (e, m) = (3u32, 2u32);
    let mut cases = 0usize;
    let mut failures = 0usize;
    for k in 1u64..1 << e {
        let idx = WalshIndex::new(vec![k]);
        let mut hits = 0u64;
        for bits in 0..1u64 << (e * m) {
            let mat = BitMatrix::from_cols(
                (0..m).map(|j| bits >> (j * e) & low_mask(e)).collect(),
                e,
            );
            let net = RandomizedNet::from_parts(vec![mat], vec![BitVectorE::zero(e)], m);
            if z_indicator(&idx, &net) {
                hits += 1;
            }
        }
        cases += 1;
        if hits != 1 << (e * m - m) {
            failures += 1;
        }
    }
    result(
        "crd-aliasing-exact",
        failures,
        cases,
        "Pr(Z = 1) = 1/4 over all 64 matrices, E = 3, m = 2".into(),
    )
}

/// The point-mean of a Walsh mode over a net is exactly Z(k) S(k): the
/// identity behind the error decomposition, exhaustive over every
/// (matrix, shift, mode) at E = 3, s = 1, m <= 2. A sign error in S or a
/// misaligned digit in Z cannot survive this.
fn check_net_mean_is_z_times_s() -> CheckResult {
    let e = 3u32;
    let mut cases = 0usize;
    let mut failures = 0usize;
    for m in 1u32..=2 {
        for bits in 0..1u64 << (e * m) {
            let mat = BitMatrix::from_cols(
                (0..m).map(|j| bits >> (j * e) & low_mask(e)).collect(),
                e,
            );
            for shift in 0..1u64 << e {
                let shifts = vec![BitVectorE::new(shift, e)];
                let net =
                    RandomizedNet::from_parts(vec![mat.clone()], shifts.clone(), m);
                for k in 1u64..1 << e {
                    let idx = WalshIndex::new(vec![k]);
                    let sum: i64 = (0..net.num_points())
                        .map(|i| wal_multi_codes(&idx, &[net.code(i, 0)]) as i64)
                        .sum();
                    let expected = if z_indicator(&idx, &net) {
                        net.num_points() as i64 * s_sign(&idx, &shifts) as i64
                    } else {
                        0
                    };
                    cases += 1;
                    if sum != expected {
                        failures += 1;
                    }
                }
            }
        }
    }
    result(
        "net-mean-is-z-times-s",
        failures,
        cases,
        "sum of wal_k over net = 2^m Z(k) S(k), exhaustive E = 3".into(),
    )
}

fn random_spectrum(rng: &mut CounterRng, s: u32, max_modes: usize, bits: u32) -> FiniteSpectrum {
    let mut terms: Vec<(WalshIndex, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let modes = 1 + rng.next_u64() as usize % max_modes;
    // Always carry a zero coefficient so coeff_zero is exercised.
    seen.insert(vec![0u64; s as usize]);
    terms.push((WalshIndex::zero(s), 2.0 * rng.next_f64() - 1.0));
    for _ in 0..modes {
        let k: Vec<u64> = (0..s).map(|_| rng.next_u64() & low_mask(bits)).collect();
        if seen.insert(k.clone()) {
            terms.push((WalshIndex::new(k), 2.0 * rng.next_f64() - 1.0));
        }
    }
    FiniteSpectrum::new(terms)
}

fn decomposition_residuals(
    stream: &SeedTree,
    trials: usize,
    m_max: u32,
    precision: Option<u32>,
) -> Result<f64> {
    let table = crate::dirnums::direction_numbers()?;
    let mut worst = 0.0f64;
    for i in 0..trials {
        let case = stream.child(i as u64);
        let mut rng = case.child(0).rng();
        let s = 1 + (rng.next_u64() % 3) as u32;
        let m = 1 + (rng.next_u64() % m_max as u64) as u32;
        let scheme = if rng.next_u64() & 1 == 0 {
            RandomizationScheme::Crd
        } else {
            RandomizationScheme::Rls(Arc::new(GeneratingMatrixSet::sobol(s, m, table)?))
        };
        let spectrum = random_spectrum(&mut rng, s, 8, 10);
        let net = match precision {
            None => randomize(&scheme, s, m, &case.child(1))?,
            Some(e) => randomize_with_precision(&scheme, s, m, e.max(m), &case.child(1))?,
        };
        worst = worst.max(verify_error_decomposition(&spectrum, &net));
    }
    Ok(worst)
}

/// Sample mean minus true mean must equal the aliasing sum Z S c over the
/// spectrum, for random spectra and random CRD/RLS nets.
fn check_error_decomposition(stream: &SeedTree, trials: usize) -> Result<CheckResult> {
    let worst = decomposition_residuals(stream, trials, 6, None)?;
    let tol = (-40f64).exp2();
    Ok(CheckResult {
        name: "error-decomposition",
        passed: worst <= tol,
        detail: format!("max residual {worst:.3e} over {trials} random spectra (tol 2^-40)"),
    })
}

fn check_error_decomposition_production(stream: &SeedTree, trials: usize) -> Result<CheckResult> {
    let worst = decomposition_residuals(stream, trials, 8, None)?;
    let tol = (-40f64).exp2();
    Ok(CheckResult {
        name: "error-decomposition-m8",
        passed: worst <= tol,
        detail: format!("max residual {worst:.3e} over {trials} random spectra, m <= 8"),
    })
}

/// Exhaustive protected-set counts never exceed the closed-form cap.
fn check_protected_set_bound() -> CheckResult {
    let mut cases = 0usize;
    let mut failures = 0usize;
    for alpha in [0u32, 1] {
        for lambda in [0.5f64, 1.0] {
            let params = SmoothnessParams::new(alpha, lambda);
            for u_size in [1usize, 2] {
                for t in 1..=6u32 {
                    let count = enumerate_k_u_t(u_size, &params, t as f64, 8);
                    let bound = k_set_size_bound(u_size, &params, t as f64);
                    cases += 1;
                    if count as f64 > bound {
                        failures += 1;
                    }
                }
            }
        }
    }
    result(
        "protected-set-bound",
        failures,
        cases,
        "|K_u(T)| <= closed form, alpha in {0,1}, lambda in {0.5,1}, T <= 6".into(),
    )
}

/// The family of indices sharing an (alpha+1)-digit truncation has exactly
/// prod 2^(l-1) members; exhaustive for 6-bit indices.
fn check_truncation_family_sizes() -> CheckResult {
    let mut cases = 0usize;
    let mut failures = 0usize;
    for alpha in [0u32, 1] {
        for bits in 1u64..64 {
            let kappa = KappaSet::from_index(bits);
            if kappa.len() != alpha + 1 {
                continue;
            }
            let members = (1u64..64)
                .filter(|&other| KappaSet::from_index(other).top_set(alpha + 1) == kappa)
                .count() as u64;
            cases += 1;
            if members != b_set_size(&[kappa], alpha) {
                failures += 1;
            }
        }
    }
    result(
        "truncation-family-sizes",
        failures,
        cases,
        "|B| = prod 2^(l-1) exactly, all 6-bit truncations".into(),
    )
}

/// Scrambled nets keep the one-dimensional stratification of the base net:
/// each coordinate's top m digits hit every value in 0..2^m exactly once.
fn check_stratification() -> Result<CheckResult> {
    let table = crate::dirnums::direction_numbers()?;
    let mut cases = 0usize;
    let mut failures = 0usize;
    for m in 1u32..=10 {
        let s = 10u32;
        let base = Arc::new(GeneratingMatrixSet::sobol(s, m, table)?);
        let net = randomize(
            &RandomizationScheme::Rls(base),
            s,
            m,
            &SeedTree::new(7).child(m as u64),
        )?;
        for j in 0..s {
            let mut cells: Vec<u64> = (0..net.num_points())
                .map(|i| net.code(i, j) >> (64 - m))
                .collect();
            cells.sort_unstable();
            cases += 1;
            if !cells.iter().enumerate().all(|(i, &c)| c == i as u64) {
                failures += 1;
            }
        }
    }
    Ok(result(
        "stratification",
        failures,
        cases,
        "top-m digits of each coordinate are a permutation of 0..2^m, RLS, m <= 10".into(),
    ))
}

/// Monte Carlo version of the mode-kill law at production precision.
fn check_crd_aliasing_monte_carlo(stream: &SeedTree) -> CheckResult {
    let draws = 100_000u64;
    let mut detail = String::new();
    let mut passed = true;
    for m in [4u32, 8] {
        let idx = WalshIndex::new(vec![0b1011]);
        let mut hits = 0u64;
        for i in 0..draws {
            let net = randomize(
                &RandomizationScheme::Crd,
                1,
                m,
                &stream.child(m as u64).child(i),
            )
            .expect("CRD randomization cannot fail");
            if z_indicator(&idx, &net) {
                hits += 1;
            }
        }
        let p = (-(m as f64)).exp2();
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let observed = hits as f64 / draws as f64;
        let devs = (observed - p).abs() / se;
        if devs > 4.0 {
            passed = false;
        }
        detail.push_str(&format!("m={m}: {observed:.5e} vs 2^-{m} ({devs:.2} SE); "));
    }
    CheckResult {
        name: "crd-aliasing-monte-carlo",
        passed,
        detail: format!("{detail}{draws} draws each"),
    }
}

/// Averaged over all digital shifts, the net estimate of a finite spectrum
/// is exactly its true mean (unbiasedness), checked by exhaustive shift
/// enumeration at E = 3.
fn check_shift_unbiasedness() -> Result<CheckResult> {
    let table = crate::dirnums::direction_numbers()?;
    let (e, m, s) = (3u32, 2u32, 2u32);
    let base = GeneratingMatrixSet::sobol(s, m, table)?;
    let matrices: Vec<BitMatrix> = (0..s).map(|j| base.matrix(j).padded(e)).collect();
    let mut rng = SeedTree::new(11).rng();
    let spectrum = random_spectrum(&mut rng, s, 6, e);
    let mut total = 0.0;
    let mut shift_count = 0u64;
    for packed in 0..1u64 << (e * s) {
        let shifts: Vec<BitVectorE> = (0..s)
            .map(|j| BitVectorE::new(packed >> (j * e) & low_mask(e), e))
            .collect();
        let net = RandomizedNet::from_parts(matrices.clone(), shifts, m);
        let mean: f64 = (0..net.num_points())
            .map(|i| {
                let codes: Vec<u64> = (0..s).map(|j| net.code(i, j)).collect();
                spectrum.eval_codes(&codes)
            })
            .sum::<f64>()
            / net.num_points() as f64;
        total += mean;
        shift_count += 1;
    }
    let average = total / shift_count as f64;
    let bias = (average - spectrum.coeff_zero()).abs();
    Ok(CheckResult {
        name: "shift-unbiasedness",
        passed: bias <= 1e-12,
        detail: format!("mean over all {shift_count} shift pairs off by {bias:.3e}"),
    })
}
