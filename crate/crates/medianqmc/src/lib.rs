//! Randomized quasi-Monte Carlo integration on base-2 digital nets.
//!
//! The crate estimates integrals over `[0,1)^s` by averaging an integrand
//! over a *digital net* — a point set whose coordinate digits are GF(2)-linear
//! images of the binary digits of the point index — and then taking the
//! median of `2r−1` independently randomized replicates. The median step
//! suppresses the heavy-tailed outliers a single randomization can produce,
//! which is what makes error bounds with exponentially small failure
//! probability possible.
//!
//! Modules, bottom up:
//!
//! * [`gf2`] — dense bit-matrix/vector arithmetic over GF(2), at most 64
//!   rows/columns, one machine word per column.
//! * [`rng`] — splittable counter-based random streams so replicates,
//!   dimensions and roles (matrix vs. shift) all draw from independent,
//!   reproducible sources.
//! * [`netgen`] — Sobol' direction-number ingestion, generating matrices,
//!   the three randomization schemes (random linear scrambling, completely
//!   random design, digital shift only), and point generation.
//! * [`walsh`] — Walsh functions, dyadic-grid Walsh coefficients, and the
//!   exact error decomposition of a randomized net estimate into
//!   `Z(k)·S(k)·f̂(k)` terms, used as a self-checking oracle.
//! * [`estimator`] — single-net means plus the median-of-means and
//!   plain-mean estimators over shared replicate streams.
//! * [`testfns`] — the normalized product test family with closed-form
//!   mean, ANOVA norms and relative variations.
//! * [`theory`] — index-set combinatorics (`K_u(T)`, `B(k_u,v)`), the
//!   constants A/B/C/D, threshold and certificate evaluation, and
//!   tractability checks.

pub mod estimator;
pub mod gf2;
pub mod netgen;
pub mod rng;
pub mod testfns;
pub mod theory;
pub mod walsh;

mod accum;

pub use estimator::{mean_estimate, median_estimate, EstimateResult, EstimatorConfig};
pub use gf2::{BitMatrix, BitVectorE};
pub use netgen::{
    code_to_unit, DirectionNumberEntry, DirectionNumbers, GeneratingMatrixSet, PointBlock,
    PointStream, RandomizationScheme, RandomizedNet, SchemeKind,
};
pub use rng::{CounterRng, RandomBits, SeedTree};
pub use testfns::ProductTestFunction;
pub use theory::{BoundCertificate, CertificateKind, SmoothnessParams, TTilde, Weights};
pub use walsh::{FiniteSpectrum, WalshIndex};
