//! The product test family f_{s,γ,α}(x) = ∏_j (1 + c_α·j^(−γ)·(x_j·e^{x_j} − 1)).
//!
//! Each factor has unit mean (∫₀¹ x·e^x dx = 1), so the exact integral is 1
//! in every dimension — convergence studies can measure absolute error
//! directly. The normalizing constant c_α makes the first-coordinate ANOVA
//! norm equal 1, and the coordinate weights j^(−γ) give the family a known
//! product-weight profile: the relative variation of a coordinate subset u
//! is exactly ∏_{j∈u} j^(−γ).

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss-Legendre rule on [0, 1].
/// Newton iteration on the Legendre recurrence; exact for polynomial
/// degree < 2n, and far below 1e−12 error for the entire analytic family
/// integrated here at n = 24.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = (x + 1.0) / 2.0;
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// ∫₀¹ g(x) dx by the 24-point Gauss-Legendre rule.
fn integrate_unit(g: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre_unit(24);
    nodes.iter().zip(&weights).map(|(&x, &w)| w * g(x)).sum()
}

/// The α-matched derivative-square integral: ∫₀¹ ((x+1+α)·e^x)² dx, the
/// squared L2 norm of the (α+1)-st derivative of x·e^x.
fn norm_integral(alpha: u32) -> f64 {
    let shift = 1.0 + alpha as f64;
    integrate_unit(|x| {
        let d = (x + shift) * x.exp();
        d * d
    })
}

/// Normalizing constant c_α, α ∈ {0, 1}: the reciprocal norm of the
/// single-coordinate factor, c_α = (∫₀¹((x+1+α)e^x)² dx)^(−1/2).
///
/// # Panics
///
/// Panics for α outside {0, 1}.
pub fn c_alpha(alpha: u32) -> f64 {
    assert!(alpha <= 1, "normalization defined for smoothness 0 and 1 only");
    1.0 / norm_integral(alpha).sqrt()
}

/// One member of the product family, with its normalization and per-
/// coordinate weights fixed at construction.
#[derive(Clone, Debug)]
pub struct ProductTestFunction {
    s: u32,
    gamma: f64,
    alpha: u32,
    c: f64,
    /// weights[j−1] = c_α · j^(−γ)
    weights: Vec<f64>,
    /// ∫₀¹ ((x+1+α)e^x)² dx, kept for ANOVA norms.
    norm_integral: f64,
}

impl ProductTestFunction {
    /// # Panics
    ///
    /// Panics for s = 0, γ < 0, or α outside {0, 1}.
    pub fn new(s: u32, gamma: f64, alpha: u32) -> Self {
        assert!(s >= 1);
        assert!(gamma >= 0.0 && gamma.is_finite());
        assert!(alpha <= 1, "normalization defined for smoothness 0 and 1 only");
        let norm_integral = norm_integral(alpha);
        let c = 1.0 / norm_integral.sqrt();
        let weights = (1..=s).map(|j| c * (j as f64).powf(-gamma)).collect();
        ProductTestFunction {
            s,
            gamma,
            alpha,
            c,
            weights,
            norm_integral,
        }
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Evaluate at x ∈ [0,1)^s, multiplying factors in increasing j so the
    /// result is deterministic.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.s as usize);
        let mut prod = 1.0;
        for (w, &xj) in self.weights.iter().zip(x) {
            debug_assert!((0.0..1.0).contains(&xj));
            prod *= 1.0 + w * (xj * xj.exp() - 1.0);
        }
        prod
    }

    /// The exact integral over [0,1)^s: each factor has unit mean because
    /// ∫₀¹ x·e^x dx = (x−1)e^x |₀¹ = 1, for every s, γ, α.
    pub fn exact_mean(&self) -> f64 {
        1.0
    }

    fn check_subset(&self, u: &[u32]) {
        for (pos, &j) in u.iter().enumerate() {
            assert!(j >= 1 && j <= self.s, "coordinate {j} outside 1..={}", self.s);
            assert!(pos == 0 || u[pos - 1] < j, "subset must be strictly increasing");
        }
    }

    /// Product weight γ_u = ∏_{j∈u} j^(−γ) of a coordinate subset given as
    /// ascending 1-based labels; the empty set has weight 0 by convention
    /// and the supremum 1 is attained at u = {1}.
    pub fn relative_variation(&self, u: &[u32]) -> f64 {
        self.check_subset(u);
        if u.is_empty() {
            return 0.0;
        }
        u.iter().map(|&j| (j as f64).powf(-self.gamma)).product()
    }

    /// ANOVA-component norm of u: c^{|u|}·(∏_{j∈u} j)^(−γ)·I^{|u|/2} with I
    /// the α-matched derivative integral. The normalization c = I^(−1/2)
    /// makes this coincide with [`Self::relative_variation`]; computing it
    /// from the raw constants keeps it an independent check of c_α.
    ///
    /// # Panics
    ///
    /// Panics on the empty subset.
    pub fn anova_norm(&self, u: &[u32]) -> f64 {
        self.check_subset(u);
        assert!(!u.is_empty(), "ANOVA norm defined for nonempty subsets");
        let cu = self.c.powi(u.len() as i32);
        let ju: f64 = u.iter().map(|&j| (j as f64).powf(-self.gamma)).product();
        cu * ju * self.norm_integral.sqrt().powi(u.len() as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const I0_CLOSED: f64 = (5.0 * 7.38905609893065_f64 - 1.0) / 4.0; // (5e²−1)/4
    const I1_CLOSED: f64 = (13.0 * 7.38905609893065_f64 - 5.0) / 4.0; // (13e²−5)/4

    #[test]
    fn quadrature_matches_closed_forms() {
        let e2 = std::f64::consts::E.powi(2);
        assert!((e2 - 7.38905609893065).abs() < 1e-14);
        assert!((norm_integral(0) - I0_CLOSED).abs() < 1e-12);
        assert!((norm_integral(1) - I1_CLOSED).abs() < 1e-12);
        assert!((norm_integral(0) - 8.986320).abs() < 1e-6);
        assert!((norm_integral(1) - 22.764432).abs() < 1e-6);
    }

    #[test]
    fn normalizing_constants() {
        assert!((c_alpha(0) - 1.0 / I0_CLOSED.sqrt()).abs() < 1e-13);
        assert!((c_alpha(1) - 1.0 / I1_CLOSED.sqrt()).abs() < 1e-13);
        assert!((c_alpha(0) - 0.333587).abs() < 1e-6);
        assert!((c_alpha(1) - 0.209591).abs() < 1e-6);
    }

    #[test]
    #[should_panic(expected = "smoothness")]
    fn c_alpha_rejects_higher_smoothness() {
        c_alpha(2);
    }

    #[test]
    fn quadrature_order_has_margin() {
        // The construction-time rule must sit well inside 1e−12; a rule
        // four points smaller already does.
        let (nodes, weights) = gauss_legendre_unit(20);
        let i0: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| {
                let d = (x + 1.0) * x.exp();
                w * d * d
            })
            .sum();
        assert!((i0 - I0_CLOSED).abs() < 1e-13);
        let total: f64 = weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14, "weights must sum to the interval length");
    }

    #[test]
    fn eval_at_zero() {
        let f = ProductTestFunction::new(1, 2.0, 0);
        let got = f.eval(&[0.0]);
        assert_eq!(got, 1.0 - f.c());
        assert!((got - 0.666413).abs() < 1e-6);
    }

    #[test]
    fn factor_is_one_at_the_fixed_point_of_x_exp_x() {
        // Root of x·e^x = 1 by bisection.
        let (mut lo, mut hi) = (0.5f64, 0.6);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let star = 0.5 * (lo + hi);
        assert!((star - 0.567143).abs() < 1e-6);
        for (gamma, alpha) in [(2.0, 0), (3.0, 1)] {
            let f = ProductTestFunction::new(1, gamma, alpha);
            assert!((f.eval(&[star]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_matches_direct_formula_and_is_multiplicative() {
        let f2 = ProductTestFunction::new(2, 2.0, 0);
        let x = [0.3, 0.8];
        let c = f2.c();
        let factor = |j: f64, xj: f64| 1.0 + c / j.powi(2) * (xj * xj.exp() - 1.0);
        assert!((f2.eval(&x) - factor(1.0, 0.3) * factor(2.0, 0.8)).abs() < 1e-15);

        // Block multiplicativity: the first s1 factors of an s-dim value
        // times the rest, with the weights following the coordinate label.
        let f7 = ProductTestFunction::new(7, 3.0, 1);
        let xs = [0.11f64, 0.92, 0.48, 0.05, 0.77, 0.31, 0.66];
        let direct: f64 = xs
            .iter()
            .enumerate()
            .map(|(i, &xj)| {
                1.0 + f7.c() / ((i + 1) as f64).powi(3) * (xj * xj.exp() - 1.0)
            })
            .product();
        assert!((f7.eval(&xs) - direct).abs() < 1e-14);
    }

    #[test]
    fn mean_is_one_by_quadrature() {
        // Midpoint rule at 2^20 cells for s=1.
        let f = ProductTestFunction::new(1, 2.0, 0);
        assert_eq!(f.exact_mean(), 1.0);
        let n = 1u64 << 20;
        let scale = 1.0 / n as f64;
        let mut acc = crate::accum::Compensated::new();
        for i in 0..n {
            acc.add(f.eval(&[(i as f64 + 0.5) * scale]));
        }
        assert!((acc.total() / n as f64 - 1.0).abs() < 1e-6);
        for (s, gamma, alpha) in [(1, 2.0, 0), (10, 3.0, 1), (100, 4.0, 0)] {
            assert_eq!(ProductTestFunction::new(s, gamma, alpha).exact_mean(), 1.0);
        }
    }

    #[test]
    fn factor_mean_is_zero_by_quadrature() {
        // ANOVA orthogonality of the u={1} component: ∫(x·e^x − 1)dx = 0.
        let residual = integrate_unit(|x| x * x.exp() - 1.0);
        assert!(residual.abs() < 1e-10);
    }

    #[test]
    fn relative_variation_examples() {
        let f = ProductTestFunction::new(5, 2.0, 0);
        assert_eq!(f.relative_variation(&[1]), 1.0);
        assert_eq!(f.relative_variation(&[]), 0.0);
        assert!((f.relative_variation(&[2, 3]) - 1.0 / 36.0).abs() < 1e-15);

        // sup over u is 1, attained at {1}, for any decay.
        for gamma in [0.0, 2.0, 3.5] {
            let f = ProductTestFunction::new(5, gamma, 0);
            for u in [&[1u32][..], &[2], &[5], &[1, 2], &[3, 4, 5]] {
                assert!(f.relative_variation(u) <= 1.0 + 1e-15);
            }
            assert_eq!(f.relative_variation(&[1]), 1.0);
        }
    }

    #[test]
    fn anova_norm_matches_relative_variation() {
        let f = ProductTestFunction::new(4, 3.0, 1);
        assert!((f.anova_norm(&[1]) - 1.0).abs() < 1e-12);
        assert!((f.anova_norm(&[1, 2]) - 0.125).abs() < 1e-12);
        for u in [&[1u32][..], &[2], &[1, 3], &[2, 3, 4]] {
            assert!((f.anova_norm(u) - f.relative_variation(u)).abs() < 1e-10);
        }
    }

    #[test]
    fn anova_norm_matches_tensor_quadrature() {
        // ‖∂^{(1,1)} f_{1,2}‖_{L2} for s=2, γ=2, α=0: the component is
        // c²·2^(−γ)·∏(x_j·e^{x_j}−1), its mixed derivative squared is
        // c⁴·2^(−2γ)·(x+1)²(y+1)²e^{2x+2y}.
        let f = ProductTestFunction::new(2, 2.0, 0);
        let (nodes, weights) = gauss_legendre_unit(24);
        let mut sq = 0.0;
        for (&x, &wx) in nodes.iter().zip(&weights) {
            for (&y, &wy) in nodes.iter().zip(&weights) {
                let dx = (x + 1.0) * x.exp();
                let dy = (y + 1.0) * y.exp();
                sq += wx * wy * dx * dx * dy * dy;
            }
        }
        let scale = f.c().powi(4) / 2f64.powi(4);
        let oracle = (scale * sq).sqrt();
        assert!((f.anova_norm(&[1, 2]) - oracle).abs() < 1e-8);
    }

    #[test]
    #[should_panic(expected = "nonempty")]
    fn anova_norm_rejects_empty_subset() {
        ProductTestFunction::new(2, 2.0, 0).anova_norm(&[]);
    }

    #[test]
    #[should_panic(expected = "increasing")]
    fn subsets_must_be_sorted() {
        ProductTestFunction::new(3, 2.0, 0).relative_variation(&[2, 1]);
    }
}
