//! Error-bound arithmetic: κ-set combinatorics, membership and enumeration
//! of the protected mode sets K_u(T), the constants A/B/C/D, the Γ envelope
//! functions, per-projection thresholds, and probabilistic certificates for
//! the median estimator under each randomization regime, plus
//! dimension-independence diagnostics.
//!
//! Everything here is pure arithmetic over smoothness parameters (α, λ) and
//! relative-variation weights γ_u; nothing draws randomness. The central
//! object is K_u(T): the set of Walsh modes with support u that a threshold
//! T obliges the net to integrate exactly. Larger T protects more modes but
//! raises the chance the randomization fails one of them; the certificates
//! price that trade-off.

use crate::accum::Compensated;
use crate::netgen::SchemeKind;
use crate::walsh::WalshIndex;

/// κ ⊆ {1..64}: the set of 1-based binary digit positions of a coordinate
/// index k (bit ℓ−1 of the word ⟺ ℓ ∈ κ), so the encoding is bijective
/// with the index itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KappaSet {
    bits: u64,
}

impl KappaSet {
    pub fn from_index(k: u64) -> Self {
        KappaSet { bits: k }
    }

    pub fn empty() -> Self {
        KappaSet { bits: 0 }
    }

    pub fn index(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    /// ‖κ‖ = Σ_{ℓ∈κ} ℓ (0 for ∅).
    pub fn norm(self) -> u64 {
        let mut bits = self.bits;
        let mut total = 0u64;
        while bits != 0 {
            total += bits.trailing_zeros() as u64 + 1;
            bits &= bits - 1;
        }
        total
    }

    /// The q-th largest element, or 0 if |κ| < q (or q = 0).
    pub fn top_q(self, q: u32) -> u32 {
        if q == 0 || self.len() < q {
            return 0;
        }
        let mut bits = self.bits;
        for _ in 1..q {
            bits &= !(1u64 << (63 - bits.leading_zeros()));
        }
        64 - bits.leading_zeros()
    }

    /// The q largest elements (all of κ when |κ| ≤ q; ∅ when q = 0).
    pub fn top_set(self, q: u32) -> KappaSet {
        let mut bits = self.bits;
        let mut drop = self.len().saturating_sub(q);
        while drop > 0 {
            bits &= bits - 1;
            drop -= 1;
        }
        KappaSet { bits }
    }

    /// ‖κ‖_(d): the norm after truncating κ to its d largest elements.
    pub fn norm_d(self, d: u32) -> u64 {
        assert!(d >= 1, "order d must be positive");
        self.top_set(d).norm()
    }

    /// Smallest element (0 for ∅).
    pub fn min_element(self) -> u32 {
        if self.bits == 0 {
            0
        } else {
            self.bits.trailing_zeros() + 1
        }
    }
}

/// Regularity parameters: the integrand has α derivatives whose last one is
/// λ-Hölder (α + λ total smoothness); θ and θ′ are free interpolation knobs
/// in (0,1); d is the order of the randomization scheme's aliasing
/// guarantee (1 for classical nets).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessParams {
    alpha: u32,
    lambda: f64,
    theta: f64,
    theta_prime: f64,
    d: u32,
}

impl SmoothnessParams {
    /// θ and θ′ default to 0.5 — mid-range keeps every constant
    /// well-conditioned — and d defaults to 1.
    ///
    /// # Panics
    ///
    /// Panics unless λ ∈ (0,1].
    pub fn new(alpha: u32, lambda: f64) -> Self {
        assert!(
            lambda > 0.0 && lambda <= 1.0,
            "lambda must lie in (0,1], got {lambda}"
        );
        SmoothnessParams { alpha, lambda, theta: 0.5, theta_prime: 0.5, d: 1 }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        assert!(theta > 0.0 && theta < 1.0, "theta must lie in (0,1), got {theta}");
        self.theta = theta;
        self
    }

    pub fn with_theta_prime(mut self, theta_prime: f64) -> Self {
        assert!(
            theta_prime > 0.0 && theta_prime < 1.0,
            "theta_prime must lie in (0,1), got {theta_prime}"
        );
        self.theta_prime = theta_prime;
        self
    }

    pub fn with_d(mut self, d: u32) -> Self {
        assert!(d >= 1, "order d must be positive");
        self.d = d;
        self
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_prime(&self) -> f64 {
        self.theta_prime
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// α + λ, the total smoothness driving every exponent.
    pub fn alpha_lambda(&self) -> f64 {
        self.alpha as f64 + self.lambda
    }

    /// Whether the scheme order d falls below the smoothness α + λ (the
    /// branch that needs the θ′ machinery).
    pub fn d_below_smoothness(&self) -> bool {
        (self.d as f64) < self.alpha_lambda()
    }
}

/// Per-projection quality offsets t̃_u attached to a randomization scheme.
/// `PerCoordinate` is the additive model t̃_u = Σ_{j∈u} t̃_j — the shape
/// every published t-value bound takes — and the only form that keeps
/// product-weight sums factorizable; `Constant` applies one offset to all
/// projections.
#[derive(Clone, Debug)]
pub enum TTilde {
    Zero,
    Constant(f64),
    PerCoordinate(Vec<f64>),
}

impl TTilde {
    fn check_len(&self, s: usize) {
        if let TTilde::PerCoordinate(v) = self {
            assert_eq!(v.len(), s, "need one t-tilde offset per coordinate");
        }
    }

    fn for_mask(&self, mask: usize) -> f64 {
        match self {
            TTilde::Zero => 0.0,
            TTilde::Constant(c) => *c,
            TTilde::PerCoordinate(v) => {
                let mut m = mask;
                let mut total = 0.0;
                while m != 0 {
                    total += v[m.trailing_zeros() as usize];
                    m &= m - 1;
                }
                total
            }
        }
    }
}

#[derive(Clone, Debug)]
enum WeightsRepr {
    Explicit(Vec<f64>),
    Product(Vec<f64>),
}

/// Relative-variation weights γ_u over nonempty coordinate subsets.
///
/// `explicit` stores the full 2^s table (capped at s ≤ 20); `product`
/// models γ_u = ∏_{j∈u} γ_j and scales to any s, because sums over subsets
/// then factorize coordinate by coordinate.
#[derive(Clone, Debug)]
pub struct Weights {
    s: usize,
    repr: WeightsRepr,
}

impl Weights {
    /// Explicit per-subset table indexed by bitmask (bit j−1 set ⟺
    /// coordinate j ∈ u); entry 0 (γ_∅) is ignored by every sum.
    ///
    /// # Panics
    ///
    /// Panics when s > 20 (2^s blowup) or the table does not cover all
    /// subsets.
    pub fn explicit(s: usize, table: Vec<f64>) -> Self {
        assert!((1..=20).contains(&s), "explicit weights are capped at s <= 20, got {s}");
        assert_eq!(table.len(), 1usize << s, "table must cover all 2^s subsets");
        assert!(table.iter().all(|g| g.is_finite() && *g >= 0.0));
        Weights { s, repr: WeightsRepr::Explicit(table) }
    }

    /// Product weights γ_u = ∏_{j∈u} γ_j.
    pub fn product(per_coord: Vec<f64>) -> Self {
        assert!(!per_coord.is_empty());
        assert!(per_coord.iter().all(|g| g.is_finite() && *g >= 0.0));
        Weights { s: per_coord.len(), repr: WeightsRepr::Product(per_coord) }
    }

    /// Power-law product weights γ_j = j^{−γ}.
    pub fn power_law(s: usize, gamma: f64) -> Self {
        Self::product((1..=s).map(|j| (j as f64).powf(-gamma)).collect())
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// γ_u for a strictly increasing 1-based coordinate set.
    pub fn gamma_u(&self, u: &[u32]) -> f64 {
        for w in u.windows(2) {
            assert!(w[0] < w[1], "coordinates must be strictly increasing");
        }
        assert!(u.iter().all(|&j| j >= 1 && j as usize <= self.s), "coordinate out of range");
        match &self.repr {
            WeightsRepr::Explicit(table) => {
                let mask: usize = u.iter().map(|&j| 1usize << (j - 1)).sum();
                table[mask]
            }
            WeightsRepr::Product(per) => u.iter().map(|&j| per[j as usize - 1]).product(),
        }
    }

    /// Σ_{u≠∅} γ_u^p · x^{|u|} · 2^{t_coef·t̃_u} — the common shape of every
    /// envelope sum here. The product path factorizes it as
    /// ∏_j (1 + γ_j^p·x·2^{t_coef·t̃_j}) − 1.
    pub fn weighted_sum(&self, p: f64, x: f64, t_tilde: &TTilde, t_coef: f64) -> f64 {
        t_tilde.check_len(self.s);
        match &self.repr {
            WeightsRepr::Explicit(table) => {
                let mut acc = Compensated::new();
                for (mask, &g) in table.iter().enumerate().skip(1) {
                    if g == 0.0 {
                        continue;
                    }
                    let tu = t_tilde.for_mask(mask);
                    acc.add(g.powf(p) * x.powi(mask.count_ones() as i32) * (t_coef * tu).exp2());
                }
                acc.total()
            }
            WeightsRepr::Product(per) => {
                // a constant offset applies to every u at once, not per factor
                let scale = match t_tilde {
                    TTilde::Constant(c) => (t_coef * c).exp2(),
                    _ => 1.0,
                };
                let mut prod = 1.0;
                for (j, &g) in per.iter().enumerate() {
                    let tj = match t_tilde {
                        TTilde::PerCoordinate(v) => v[j],
                        _ => 0.0,
                    };
                    prod *= 1.0 + g.powf(p) * x * (t_coef * tj).exp2();
                }
                scale * (prod - 1.0)
            }
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Per-coordinate contribution to the K_u(T) criterion. κ is truncated to
/// its α+1 largest digits — an index and its truncation share membership,
/// since digits below the smallest retained one are free — and contributes
/// (λ−1)·⌈κ⌉_{α+1} + ‖κ‖ of the truncation.
fn coordinate_weight(kj: u64, params: &SmoothnessParams) -> f64 {
    let reduced = KappaSet::from_index(kj).top_set(params.alpha() + 1);
    (params.lambda() - 1.0) * reduced.top_q(params.alpha() + 1) as f64 + reduced.norm() as f64
}

/// Membership of a nonzero index in K_u(T) — the modes the analysis
/// requires the net to integrate exactly — where u is the index support:
/// Σ_j [(λ−1)·⌈κ_j⌉_{α+1} + ‖κ_j‖] ≤ T over the truncated κ_j.
///
/// # Panics
///
/// Panics on the zero index.
pub fn in_k_u_t(idx: &WalshIndex, params: &SmoothnessParams, t: f64) -> bool {
    assert!(!idx.is_zero(), "membership requires a nonzero index");
    let mut lhs = 0.0;
    for &kj in idx.components() {
        if kj != 0 {
            lhs += coordinate_weight(kj, params);
        }
    }
    lhs <= t
}

/// Membership in K′_u(T′) = {k : Σ_{j∈u} ‖κ_j‖_(d) > T′}, the modes an
/// order-d scheme can alias at all.
///
/// # Panics
///
/// Panics on the zero index.
pub fn in_k_prime_u_t(idx: &WalshIndex, d: u32, t_prime: f64) -> bool {
    assert!(!idx.is_zero(), "membership requires a nonzero index");
    let total: u64 = idx
        .components()
        .iter()
        .filter(|&&kj| kj != 0)
        .map(|&kj| KappaSet::from_index(kj).norm_d(d))
        .sum();
    (total as f64) > t_prime
}

/// Exact |K_u(T)| restricted to indices whose digits sit at positions
/// ≤ bit_budget, by exhaustive enumeration over u_size-tuples of nonzero
/// components. Counts are monotone in bit_budget and stabilize at the true
/// cardinality once bit_budget ≥ T/λ: the criterion value of an index with
/// top digit ℓ is at least λℓ.
///
/// # Panics
///
/// Panics when the search space exceeds 2^24 tuples.
pub fn enumerate_k_u_t(u_size: usize, params: &SmoothnessParams, t: f64, bit_budget: u32) -> u64 {
    assert!(u_size >= 1);
    assert!(bit_budget >= 1 && bit_budget as usize * u_size <= 24, "enumeration budget overflow");
    let top = 1u64 << bit_budget;
    let mut k = vec![1u64; u_size];
    let mut count = 0u64;
    'tuples: loop {
        let lhs: f64 = k.iter().map(|&kj| coordinate_weight(kj, params)).sum();
        if lhs <= t {
            count += 1;
        }
        let mut j = 0;
        loop {
            k[j] += 1;
            if k[j] < top {
                break;
            }
            k[j] = 1;
            j += 1;
            if j == u_size {
                break 'tuples;
            }
        }
    }
    count
}

/// |B(k_u, v)| = ∏_{j∈v} 2^{ℓ_j−1}: how many indices share a given
/// (α+1)-digit truncation, with ℓ_j the smallest retained digit (the free
/// digits are exactly those below it).
///
/// # Panics
///
/// Panics unless every κ has exactly α+1 digits.
pub fn b_set_size(v_kappas: &[KappaSet], alpha: u32) -> u64 {
    let mut size = 1u64;
    for kappa in v_kappas {
        assert_eq!(kappa.len(), alpha + 1, "truncations carry exactly alpha+1 digits");
        size <<= kappa.min_element() - 1;
    }
    size
}

/// Closed-form cap on the protected-set size:
/// |K_u(T)| ≤ 2^{T/(α+λ)}·(A·max(T/(α+λ),1) + B)^{|u|}.
pub fn k_set_size_bound(u_size: usize, params: &SmoothnessParams, t: f64) -> f64 {
    let (a, b) = const_ab(params);
    let ratio = t / params.alpha_lambda();
    ratio.exp2() * (a * ratio.max(1.0) + b).powi(u_size as i32)
}

/// Cap on |K_u(T) ∩ K′_u(T′)| for an order-d scheme with d < α+λ, valid
/// for T ∈ [T′, (α+λ)T′/d]: with β = α+λ−d,
/// 2^{(T−T′)/β}·(A·max((T−T′)/β,1)+B)^{|u|} + 2^{(T−θ′T′)/β}·D^{|u|}.
pub fn k_set_intersection_bound(
    u_size: usize,
    params: &SmoothnessParams,
    t: f64,
    t_prime: f64,
) -> f64 {
    assert!(params.d_below_smoothness(), "requires order d < alpha + lambda");
    assert!(
        t_prime >= 0.0 && t >= t_prime && t <= params.alpha_lambda() * t_prime / params.d() as f64,
        "valid for T in [T', (alpha+lambda)T'/d]"
    );
    let (a, b) = const_ab(params);
    let beta = params.alpha_lambda() - params.d() as f64;
    let ratio = (t - t_prime) / beta;
    ratio.exp2() * (a * ratio.max(1.0) + b).powi(u_size as i32)
        + ((t - params.theta_prime() * t_prime) / beta).exp2() * const_d(params).powi(u_size as i32)
}

/// (A, B): the geometric-series constants behind the size bounds; B is the
/// empty sum 0 when α = 0.
pub fn const_ab(params: &SmoothnessParams) -> (f64, f64) {
    let alpha = params.alpha();
    let root = (1.0 / params.alpha_lambda()).exp2() - 1.0;
    let a = 1.0 / (factorial(alpha) * root.powi(alpha as i32));
    let b = (1..=alpha).map(|i| 1.0 / (factorial(i) * root.powi(i as i32))).sum();
    (a, b)
}

/// C: the per-coordinate tail-mass constant — how much squared spectral
/// weight can survive outside a threshold set, discounted by 4^{−θT}.
pub fn const_c(params: &SmoothnessParams) -> f64 {
    let alpha = params.alpha();
    let al = params.alpha_lambda();
    let theta = params.theta();
    let four = |e: f64| (2.0 * e).exp2();
    let first = four(-(alpha as f64))
        / (factorial(alpha)
            * (four(al * (1.0 - theta)) - 1.0)
            * (four(1.0 - theta) - 1.0).powi(alpha as i32));
    let second: f64 = (0..=alpha)
        .map(|a| four(1.0 - a as f64) / (factorial(a) * (four(1.0 - theta) - 1.0).powi(a as i32)))
        .sum();
    first + second
}

/// D: the cross-threshold constant for order-d schemes with d < α+λ; the
/// sum over 1..=α−d is the empty sum 0 when α = d.
pub fn const_d(params: &SmoothnessParams) -> f64 {
    assert!(params.d_below_smoothness(), "requires order d < alpha + lambda");
    let alpha = params.alpha();
    let d = params.d();
    // d integer below α+λ with λ ≤ 1 forces d ≤ α
    debug_assert!(d <= alpha);
    let beta = params.alpha_lambda() - d as f64;
    let full = (1.0 / beta).exp2() - 1.0;
    let discounted = ((1.0 - params.theta_prime()) / beta).exp2() - 1.0;
    let first = if alpha == d {
        0.0
    } else {
        (1.0 / (factorial(d) * discounted.powi(d as i32)))
            * (1..=alpha - d)
                .map(|a| 1.0 / (factorial(a) * full.powi(a as i32)))
                .sum::<f64>()
    };
    let second: f64 =
        (1..=d).map(|a| 1.0 / (factorial(a) * discounted.powi(a as i32))).sum();
    first + second
}

/// Γ(m) = 1 + Σ_{u≠∅} γ_u^{1/(α+λ+1/2)}·(A·m+B)^{|u|}: the polynomial
/// envelope pricing how many modes the thresholds must protect.
pub fn gamma_capital(weights: &Weights, params: &SmoothnessParams, m: u32) -> f64 {
    let (a, b) = const_ab(params);
    let p = 1.0 / (params.alpha_lambda() + 0.5);
    1.0 + weights.weighted_sum(p, a * m as f64 + b, &TTilde::Zero, 0.0)
}

/// Γ₂(m): Γ(m) plus the order-d spillover term
/// 2^{(1−θ′)dm/(α+λ−d)}·D^{|u|} inside the sum; requires d < α+λ.
pub fn gamma_capital_2(weights: &Weights, params: &SmoothnessParams, m: u32) -> f64 {
    assert!(params.d_below_smoothness(), "requires order d < alpha + lambda");
    let (a, b) = const_ab(params);
    let p = 1.0 / (params.alpha_lambda() + 0.5);
    let beta = params.alpha_lambda() - params.d() as f64;
    let spill = ((1.0 - params.theta_prime()) * params.d() as f64 * m as f64 / beta).exp2();
    1.0 + weights.weighted_sum(p, a * m as f64 + b, &TTilde::Zero, 0.0)
        + spill * weights.weighted_sum(p, const_d(params), &TTilde::Zero, 0.0)
}

/// Aliasing-probability budget δ baked into the certificates; exposed as a
/// parameter on [`threshold_t`] for exploration.
pub const DEFAULT_DELTA: f64 = 1.0 / 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdVariant {
    /// Completely random design; ignores t̃_u and d.
    Crd,
    /// Order-d scheme with d < α+λ.
    SmallD,
}

/// The protection threshold T_{u,m} that spreads a δ budget of aliasing
/// probability across all projections:
///
/// - Crd:    (α+λ)m − (α+λ)·(log₂Γ(m) − log₂δ − log₂γ_u/(α+λ+1/2))
/// - SmallD: (α+λ)(m−t̃_u) − (α+λ−d)·(log₂Γ₂(m) − log₂δ − log₂γ_u/(α+λ+1/2))
pub fn threshold_t(
    variant: ThresholdVariant,
    weights: &Weights,
    params: &SmoothnessParams,
    u: &[u32],
    m: u32,
    delta: f64,
    t_tilde_u: f64,
) -> f64 {
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
    let al = params.alpha_lambda();
    let gu = weights.gamma_u(u);
    assert!(gu > 0.0, "threshold undefined for a zero-weight projection");
    let budget = |envelope: f64| envelope.log2() - delta.log2() - gu.log2() / (al + 0.5);
    match variant {
        ThresholdVariant::Crd => {
            al * m as f64 - al * budget(gamma_capital(weights, params, m))
        }
        ThresholdVariant::SmallD => {
            let beta = al - params.d() as f64;
            al * (m as f64 - t_tilde_u) - beta * budget(gamma_capital_2(weights, params, m))
        }
    }
}

/// Which error-bound regime produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    /// Completely random design.
    Crd,
    /// Order-d scheme with d ≥ α+λ: aliasing below threshold is
    /// impossible, so no Γ envelope appears.
    LargeD,
    /// Order-d scheme with d < α+λ (the random linear scrambling is the
    /// d = 1 case).
    SmallD,
    /// Dimension-independence regime: reported by [`tractability_check`],
    /// never constructed by [`certificate`].
    Tractable,
}

/// A probabilistic guarantee Pr(|estimate − μ|² > threshold) ≤ failure_prob
/// for the median of 2r−1 replicates, with threshold scaling as ‖f‖².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCertificate {
    pub threshold: f64,
    pub failure_prob: f64,
    pub kind: CertificateKind,
}

/// Builds the squared-error certificate for one regime at resolution m with
/// 2r−1 replicates and variation norm `f_norm`. With e = 2θ(α+λ)+1:
///
/// - Crd:    16^e·[Σ γ_u^{(1+2(1−θ)(α+λ))/(α+λ+1/2)}·C^{|u|}]·Γ(m)^{2θ(α+λ)}/2^{e·m}
/// - LargeD: 16·[Σ γ_u²·C^{|u|}·2^{t̃_u·e}]/2^{e·m}
/// - SmallD: 16^{e₂}·[Σ γ_u^{(1+2θd+2(1−θ)(α+λ))/(α+λ+1/2)}·C^{|u|}·2^{t̃_u·e}]·Γ₂(m)^{2θ(α+λ−d)}/2^{e·m}
///   with e₂ = 2θ(α+λ−d)+1.
///
/// # Panics
///
/// Panics on a branch mismatch (LargeD with d < α+λ, SmallD with d ≥ α+λ)
/// and on the Tractable kind, which is a summability property rather than
/// a finite-m bound.
pub fn certificate(
    kind: CertificateKind,
    weights: &Weights,
    params: &SmoothnessParams,
    t_tilde: &TTilde,
    m: u32,
    r: u32,
    f_norm: f64,
) -> BoundCertificate {
    assert!(m >= 1 && r >= 1);
    assert!(f_norm.is_finite() && f_norm > 0.0);
    let al = params.alpha_lambda();
    let theta = params.theta();
    let e = 2.0 * theta * al + 1.0;
    let c = const_c(params);
    let threshold = match kind {
        CertificateKind::Crd => {
            let p = (1.0 + 2.0 * (1.0 - theta) * al) / (al + 0.5);
            (4.0 * e).exp2()
                * weights.weighted_sum(p, c, &TTilde::Zero, 0.0)
                * gamma_capital(weights, params, m).powf(2.0 * theta * al)
                / (e * m as f64).exp2()
        }
        CertificateKind::LargeD => {
            assert!(
                !params.d_below_smoothness(),
                "branch mismatch: needs order d >= alpha + lambda"
            );
            16.0 * weights.weighted_sum(2.0, c, t_tilde, e) / (e * m as f64).exp2()
        }
        CertificateKind::SmallD => {
            assert!(
                params.d_below_smoothness(),
                "branch mismatch: needs order d < alpha + lambda"
            );
            let beta = al - params.d() as f64;
            let e2 = 2.0 * theta * beta + 1.0;
            let p = (1.0 + 2.0 * theta * params.d() as f64 + 2.0 * (1.0 - theta) * al)
                / (al + 0.5);
            (4.0 * e2).exp2()
                * weights.weighted_sum(p, c, t_tilde, e)
                * gamma_capital_2(weights, params, m).powf(2.0 * theta * beta)
                / (e * m as f64).exp2()
        }
        CertificateKind::Tractable => panic!(
            "tractability is a summability report, not a finite-m certificate; \
             use tractability_check"
        ),
    } * f_norm
        * f_norm;
    assert!(threshold.is_finite() && threshold > 0.0, "degenerate threshold {threshold}");
    BoundCertificate { threshold, failure_prob: (-(r as f64)).exp2(), kind }
}

/// The certificate branch a scheme supports. The completely random design
/// has its own aliasing law and never takes the order-d branches — those
/// need per-projection t̃_u offsets the design does not define. The
/// matrix-structured schemes carry t̃_u and split on d vs α+λ.
pub fn certificate_kind_for(scheme: SchemeKind, params: &SmoothnessParams) -> CertificateKind {
    match scheme {
        SchemeKind::Crd => CertificateKind::Crd,
        SchemeKind::Rls | SchemeKind::ShiftOnly => {
            if params.d_below_smoothness() {
                CertificateKind::SmallD
            } else {
                CertificateKind::LargeD
            }
        }
    }
}

/// t̃_u for the random linear scrambling (order d = 1): the projection
/// t-value of the base net plus |u| − 1.
pub fn t_tilde_rls(u_size: usize, t_u: u32) -> u32 {
    assert!(u_size >= 1);
    t_u + u_size as u32 - 1
}

/// Published bound on the projection t-value of the base-2 Niederreiter
/// sequence: Σ_{j∈u} (log₂ j + log₂log₂(j+2) + 2). Additive over
/// coordinates, so it doubles as a per-coordinate t̃_j model.
pub fn niederreiter_t_bound(u: &[u32]) -> f64 {
    u.iter()
        .map(|&j| {
            assert!(j >= 1, "coordinates are 1-based");
            let j = j as f64;
            j.log2() + (j + 2.0).log2().log2() + 2.0
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TractabilityVerdict {
    ConvergesNumerically,
    Diverges,
    Inconclusive,
}

/// Exact summability criterion for power-law inputs γ_j ~ j^{−p},
/// 2^{t̃_j} ~ j^q: the series converges iff
/// (p − (α+λ+1/2)·q)/(α+λ−d+1/2) > 1.
#[derive(Clone, Copy, Debug)]
pub struct PowerLawTest {
    pub p: f64,
    pub q: f64,
    pub criterion: f64,
    pub passes: bool,
}

#[derive(Clone, Debug)]
pub struct TractabilityReport {
    /// φ = (α+λ+1/2)/(α+λ−d+1/2).
    pub phi: f64,
    /// Running sums of (γ_j^{1/(α+λ+1/2)}·2^{t̃_j})^φ — the
    /// dimension-independence condition for order-d schemes.
    pub partial_sums: Vec<f64>,
    /// Running sums of γ_j^{1/(α+λ+1/2)} — the completely-random-design
    /// condition, which carries no t̃ factor.
    pub crd_partial_sums: Vec<f64>,
    pub power_law: Option<PowerLawTest>,
    pub verdict: TractabilityVerdict,
}

/// Numerically probes the dimension-independence condition
/// Σ_j (γ_j^{1/(α+λ+1/2)}·2^{t̃_j})^φ < ∞ for an order-d scheme with
/// d < α+λ. The verdict estimates the polynomial decay order of the terms
/// from the tail of the supplied finite sequence; callers with power-law
/// inputs can pass (p, q) for the exact criterion.
///
/// # Panics
///
/// Panics when d ≥ α+λ (φ is undefined there) or on length mismatches.
pub fn tractability_check(
    gamma_j: &[f64],
    t_tilde_j: &[f64],
    params: &SmoothnessParams,
    power_law: Option<(f64, f64)>,
) -> TractabilityReport {
    assert!(params.d_below_smoothness(), "phi requires order d < alpha + lambda");
    assert_eq!(gamma_j.len(), t_tilde_j.len());
    assert!(!gamma_j.is_empty());
    let al = params.alpha_lambda();
    let beta = al - params.d() as f64;
    let phi = (al + 0.5) / (beta + 0.5);
    let p_exp = 1.0 / (al + 0.5);
    let mut terms = Vec::with_capacity(gamma_j.len());
    let mut partial_sums = Vec::with_capacity(gamma_j.len());
    let mut crd_partial_sums = Vec::with_capacity(gamma_j.len());
    let mut acc = Compensated::new();
    let mut crd_acc = Compensated::new();
    for (&g, &t) in gamma_j.iter().zip(t_tilde_j) {
        assert!(g.is_finite() && g >= 0.0);
        let term = (g.powf(p_exp) * t.exp2()).powf(phi);
        terms.push(term);
        acc.add(term);
        partial_sums.push(acc.total());
        crd_acc.add(g.powf(p_exp));
        crd_partial_sums.push(crd_acc.total());
    }
    let power_law = power_law.map(|(p, q)| {
        let criterion = (p - (al + 0.5) * q) / (beta + 0.5);
        PowerLawTest { p, q, criterion, passes: criterion > 1.0 }
    });
    TractabilityReport {
        phi,
        partial_sums,
        crd_partial_sums,
        power_law,
        verdict: decay_verdict(&terms),
    }
}

/// Estimates the polynomial decay order of the term tail by comparing the
/// last term against the one at half the length; clearly above 1 behaves
/// like a convergent p-series on the observed range, clearly below 1 like
/// a divergent one.
fn decay_verdict(terms: &[f64]) -> TractabilityVerdict {
    let n = terms.len();
    if n < 8 {
        return TractabilityVerdict::Inconclusive;
    }
    let last = terms[n - 1];
    let half = terms[n / 2 - 1];
    if last == 0.0 {
        return TractabilityVerdict::ConvergesNumerically;
    }
    if half <= 0.0 || !last.is_finite() {
        return TractabilityVerdict::Inconclusive;
    }
    let order = (half / last).ln() / (n as f64 / (n / 2) as f64).ln();
    if order > 1.1 {
        TractabilityVerdict::ConvergesNumerically
    } else if order < 0.95 {
        TractabilityVerdict::Diverges
    } else {
        TractabilityVerdict::Inconclusive
    }
}

/// Grid search (θ ∈ {0.05, 0.10, …, 0.95}) for the θ minimizing the
/// certificate threshold at fixed (m, r); returns (θ, threshold). Nothing
/// guarantees the grid optimum is the true optimum.
pub fn best_theta(
    kind: CertificateKind,
    weights: &Weights,
    params: &SmoothnessParams,
    t_tilde: &TTilde,
    m: u32,
    r: u32,
    f_norm: f64,
) -> (f64, f64) {
    let mut best = (params.theta(), f64::INFINITY);
    for i in 1..20 {
        let theta = i as f64 / 20.0;
        let cert = certificate(kind, weights, &params.with_theta(theta), t_tilde, m, r, f_norm);
        if cert.threshold < best.1 {
            best = (theta, cert.threshold);
        }
    }
    best
}
