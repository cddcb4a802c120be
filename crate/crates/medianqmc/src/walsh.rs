//! Walsh functions and the spectral view of digital-net sampling.
//!
//! A base-2 Walsh mode wal_k pairs the binary digits of k with the
//! fractional digits of x: wal_k(x) = (−1)^⟨k⃗,x⃗⟩. Averaging wal_k over a
//! randomized net collapses to Z(k)·S(k): the GF(2)-linear structure keeps
//! a mode either fully (Z(k)=1, the mode *aliases* with the net) or not at
//! all, and the digital shift only contributes a sign S(k). That turns the
//! estimator's error into Σ_{k≠0} Z(k)S(k)f̂(k) — an identity this module
//! can verify exactly on any finite spectrum, which is what makes the
//! whole pipeline self-checking.
//!
//! Alignment: `wal` takes digit-aligned words (gf2 convention, bit ℓ−1 =
//! digit ℓ). Point blocks store fixed-point codes; the `*_codes` variants
//! bridge via `reverse_bits`.

use crate::accum::Compensated;
use crate::gf2::{low_mask, reverse_low_bits, vecmat, BitVectorE};
use crate::netgen::{PointStream, RandomizedNet};

/// A multi-index k ∈ ℕ₀^s selecting one Walsh mode per coordinate.
/// Component bits are capped at 64, matching the net precision; κ_j (the
/// 1-based digit positions of k_j) is a derived view.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WalshIndex {
    k: Vec<u64>,
}

impl WalshIndex {
    pub fn new(k: Vec<u64>) -> Self {
        assert!(!k.is_empty());
        WalshIndex { k }
    }

    pub fn zero(s: u32) -> Self {
        Self::new(vec![0; s as usize])
    }

    pub fn s(&self) -> u32 {
        self.k.len() as u32
    }

    pub fn k(&self, j: u32) -> u64 {
        self.k[j as usize]
    }

    pub fn components(&self) -> &[u64] {
        &self.k
    }

    pub fn is_zero(&self) -> bool {
        self.k.iter().all(|&kj| kj == 0)
    }

    /// Support u = {j : k_j ≠ 0}, 0-based coordinates.
    pub fn support(&self) -> Vec<u32> {
        (0..self.s()).filter(|&j| self.k[j as usize] != 0).collect()
    }

    /// κ_j: 1-based positions of the nonzero digits of k_j, ascending.
    pub fn kappa(&self, j: u32) -> Vec<u32> {
        let mut kj = self.k[j as usize];
        let mut out = Vec::with_capacity(kj.count_ones() as usize);
        while kj != 0 {
            out.push(kj.trailing_zeros() + 1);
            kj &= kj - 1;
        }
        out
    }
}

/// wal_k(x) for one coordinate; `digits` is the digit-aligned word of x
/// (bit ℓ−1 = digit ℓ). Returns (−1)^parity(popcount(k AND digits)).
#[inline]
pub fn wal(k: u64, digits: u64) -> i32 {
    1 - 2 * ((k & digits).count_ones() & 1) as i32
}

/// Tensor-product Walsh mode: product of per-coordinate `wal` values over
/// digit-aligned words.
pub fn wal_multi(idx: &WalshIndex, digits: &[u64]) -> i32 {
    debug_assert_eq!(idx.k.len(), digits.len());
    let mut parity = 0u32;
    for (&kj, &dj) in idx.k.iter().zip(digits) {
        parity ^= (kj & dj).count_ones() & 1;
    }
    1 - 2 * parity as i32
}

/// As [`wal_multi`] but over fixed-point codes (a `PointBlock` row).
pub fn wal_multi_codes(idx: &WalshIndex, codes: &[u64]) -> i32 {
    debug_assert_eq!(idx.k.len(), codes.len());
    let mut parity = 0u32;
    for (&kj, &cj) in idx.k.iter().zip(codes) {
        parity ^= (kj.reverse_bits() & cj).count_ones() & 1;
    }
    1 - 2 * parity as i32
}

/// A finitely supported Walsh expansion f = Σ ĉ_k wal_k with distinct
/// indices. Serves as a test integrand whose net-sampling error is known
/// in closed form.
#[derive(Clone, Debug)]
pub struct FiniteSpectrum {
    terms: Vec<(WalshIndex, f64)>,
}

impl FiniteSpectrum {
    /// # Panics
    ///
    /// Panics on an empty term list, mixed dimensions, or duplicate indices.
    pub fn new(terms: Vec<(WalshIndex, f64)>) -> Self {
        assert!(!terms.is_empty());
        let s = terms[0].0.s();
        assert!(terms.iter().all(|(idx, _)| idx.s() == s), "mixed dimensions");
        let mut seen = std::collections::HashSet::new();
        for (idx, _) in &terms {
            assert!(seen.insert(idx.clone()), "duplicate index {:?}", idx.components());
        }
        FiniteSpectrum { terms }
    }

    pub fn s(&self) -> u32 {
        self.terms[0].0.s()
    }

    pub fn terms(&self) -> &[(WalshIndex, f64)] {
        &self.terms
    }

    /// Coefficient at k = 0, i.e. the exact integral of the expansion.
    pub fn coeff_zero(&self) -> f64 {
        self.terms
            .iter()
            .find(|(idx, _)| idx.is_zero())
            .map_or(0.0, |&(_, c)| c)
    }

    /// Evaluate at a point given as digit-aligned words.
    pub fn eval_digits(&self, digits: &[u64]) -> f64 {
        self.terms
            .iter()
            .map(|(idx, c)| c * f64::from(wal_multi(idx, digits)))
            .sum()
    }

    /// Evaluate at a point given as fixed-point codes (a `PointBlock` row).
    pub fn eval_codes(&self, codes: &[u64]) -> f64 {
        self.terms
            .iter()
            .map(|(idx, c)| c * f64::from(wal_multi_codes(idx, codes)))
            .sum()
    }
}

/// Walsh coefficient of a black-box integrand by midpoint quadrature on
/// the dyadic grid of 2^{s·p} cells. Exact when f is constant on each cell
/// (every index in a spectrum below resolution p); otherwise carries the
/// O(2^(−p)) midpoint bias and is for diagnostics only.
///
/// # Panics
///
/// Panics if some index bit sits at or above the grid resolution, or if
/// s·p > 24 (the full-grid sweep is meant for test scales).
pub fn walsh_coeff_dyadic<F>(f: F, idx: &WalshIndex, p: u32) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let s = idx.s();
    assert!(p >= 1);
    for j in 0..s {
        assert_eq!(idx.k(j) >> p, 0, "index bit at or above grid resolution");
    }
    let total_bits = s * p;
    assert!(total_bits <= 24, "dyadic grid of 2^{total_bits} cells exceeds the diagnostic cap");
    let cells = 1u64 << total_bits;
    let mask = low_mask(p);
    let scale = 2f64.powi(-(p as i32));
    let mut x = vec![0.0; s as usize];
    let mut acc = Compensated::new();
    for g in 0..cells {
        let mut parity = 0u32;
        for j in 0..s {
            let cell = g >> (j * p) & mask;
            x[j as usize] = (cell as f64 + 0.5) * scale;
            // Midpoint digits: the p cell digits, then digit p+1 = 1.
            let digits = reverse_low_bits(cell, p) | 1 << p;
            parity ^= (idx.k(j) & digits).count_ones() & 1;
        }
        let sign = 1.0 - 2.0 * f64::from(parity);
        acc.add(sign * f(&x));
    }
    acc.total() / cells as f64
}

/// Z(k) = 1{⊕_j k_j^T C_j = 0}: does mode k alias with the net's linear
/// structure? Bits of k_j at or above the net precision pair with the
/// implicit zero rows of C_j and drop out.
///
/// # Panics
///
/// Panics when `idx` is the zero index (excluded from the error sum).
pub fn z_indicator(idx: &WalshIndex, net: &RandomizedNet) -> bool {
    assert!(!idx.is_zero(), "Z is defined on nonzero indices only");
    assert_eq!(idx.s(), net.s());
    let e = net.precision();
    let mut acc = BitVectorE::zero(net.m());
    for j in 0..net.s() {
        let kj = BitVectorE::new(idx.k(j) & low_mask(e), e);
        acc = acc.xor(&vecmat(kj, net.matrix(j)));
    }
    acc.bits() == 0
}

/// S(k) = (−1)^{Σ_j k_j^T D_j}: the sign an aliasing mode picks up from
/// the digital shifts.
pub fn s_sign(idx: &WalshIndex, shifts: &[BitVectorE]) -> i32 {
    debug_assert_eq!(idx.k.len(), shifts.len());
    let mut parity = 0u32;
    for (&kj, dj) in idx.k.iter().zip(shifts) {
        parity ^= (kj & dj.bits()).count_ones() & 1;
    }
    1 - 2 * parity as i32
}

/// Check the exact error decomposition of one net estimate of a finite
/// spectrum: sample mean − ĉ_0 must equal Σ_{k≠0} Z(k)S(k)ĉ_k. Returns the
/// absolute difference between the two sides (0 in exact arithmetic;
/// ≤ 2^(−40) is the floating-point contract for O(1) coefficients).
pub fn verify_error_decomposition(spectrum: &FiniteSpectrum, net: &RandomizedNet) -> f64 {
    assert_eq!(spectrum.s(), net.s());
    let mut acc = Compensated::new();
    let mut stream = PointStream::new(net);
    while let Some((_, row)) = stream.advance() {
        acc.add(spectrum.eval_codes(row));
    }
    let lhs = acc.total() / net.num_points() as f64 - spectrum.coeff_zero();

    let shifts: Vec<BitVectorE> = (0..net.s()).map(|j| net.shift(j)).collect();
    let mut rhs = Compensated::new();
    for (idx, c) in spectrum.terms() {
        if !idx.is_zero() && z_indicator(idx, net) {
            rhs.add(c * f64::from(s_sign(idx, &shifts)));
        }
    }
    (lhs - rhs.total()).abs()
}
