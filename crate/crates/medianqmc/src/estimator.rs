//! Replicated net estimators: single-net means, the median-of-means
//! estimator over 2r−1 independent randomizations, and the plain-mean
//! baseline over the *same* replicates.
//!
//! The median is what buys robustness: a single randomized net estimate
//! has heavy tails (a mode that aliases with the net contributes its whole
//! coefficient), but the middle order statistic of 2r−1 replicates is only
//! wrong when at least r of them are wrong simultaneously, which happens
//! with probability exponentially small in r. The plain mean over the same
//! replicate values is the classical estimator it is compared against.

use rayon::prelude::*;

use crate::accum::Compensated;
use crate::netgen::{code_to_unit, randomize, NetError, PointStream, RandomizationScheme, RandomizedNet, SchemeKind};
use crate::rng::SeedTree;

/// Everything one estimate needs: net shape, replicate parameter and the
/// master seed the replicate streams derive from.
#[derive(Clone)]
pub struct EstimatorConfig {
    pub scheme: RandomizationScheme,
    pub s: u32,
    pub m: u32,
    /// Uses 2r−1 replicates; the count is always odd so the median is a
    /// single order statistic.
    pub r: u32,
    pub master_seed: u64,
}

impl EstimatorConfig {
    fn validate(&self) {
        assert!(self.r >= 1, "need at least one replicate (r ≥ 1)");
        assert!(self.m >= 1 && self.s >= 1);
    }

    pub fn replicate_count(&self) -> u64 {
        2 * self.r as u64 - 1
    }

    /// Total integrand evaluations: (2r−1)·2^m.
    pub fn eval_count(&self) -> u64 {
        self.replicate_count() << self.m
    }
}

/// Outcome of a replicated estimate. `replicate_values` keeps generation
/// order (replicate index), not sorted order, so runs are reproducible and
/// the mean/median baselines can share them.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult {
    pub value: f64,
    pub replicate_values: Vec<f64>,
    pub scheme: SchemeKind,
    pub eval_count: u64,
}

impl EstimateResult {
    /// Reduce replicates by the exact middle order statistic.
    pub fn median_of(replicate_values: Vec<f64>, scheme: SchemeKind, eval_count: u64) -> Self {
        assert!(replicate_values.len() % 2 == 1);
        let mut sorted = replicate_values.clone();
        let mid = sorted.len() / 2;
        let (_, med, _) = sorted.select_nth_unstable_by(mid, f64::total_cmp);
        EstimateResult {
            value: *med,
            replicate_values,
            scheme,
            eval_count,
        }
    }

    /// Reduce replicates by the arithmetic mean.
    pub fn mean_of(replicate_values: Vec<f64>, scheme: SchemeKind, eval_count: u64) -> Self {
        let mut acc = Compensated::new();
        for &v in &replicate_values {
            acc.add(v);
        }
        EstimateResult {
            value: acc.total() / replicate_values.len() as f64,
            replicate_values,
            scheme,
            eval_count,
        }
    }
}

/// Mean of f over the points of one already-randomized net, in fixed index
/// order with compensated summation (deterministic regardless of threads).
pub fn point_mean<F>(f: &F, net: &RandomizedNet) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut coords = vec![0.0; net.s() as usize];
    let mut acc = Compensated::new();
    let mut stream = PointStream::new(net);
    while let Some((_, row)) = stream.advance() {
        for (c, &code) in coords.iter_mut().zip(row) {
            *c = code_to_unit(code);
        }
        acc.add(f(&coords));
    }
    acc.total() / net.num_points() as f64
}

/// One replicate: draw a net from the given stream and average f over it.
pub fn estimate_once<F>(
    f: &F,
    scheme: &RandomizationScheme,
    s: u32,
    m: u32,
    stream: &SeedTree,
) -> Result<f64, NetError>
where
    F: Fn(&[f64]) -> f64,
{
    Ok(point_mean(f, &randomize(scheme, s, m, stream)?))
}

/// The 2r−1 replicate means of a config, in replicate order. Replicate i
/// draws from the master seed's child stream i, so the set of values is
/// independent of evaluation order and thread count. This is the shared
/// core of [`median_estimate`] and [`mean_estimate`]: both reduce exactly
/// these values.
pub fn replicate_means<F>(f: &F, config: &EstimatorConfig) -> Result<Vec<f64>, NetError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate();
    let tree = SeedTree::new(config.master_seed);
    (0..config.replicate_count())
        .into_par_iter()
        .map(|rep| estimate_once(f, &config.scheme, config.s, config.m, &tree.child(rep)))
        .collect()
}

/// Median-of-means: the middle order statistic of the 2r−1 replicate means.
pub fn median_estimate<F>(f: &F, config: &EstimatorConfig) -> Result<EstimateResult, NetError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values = replicate_means(f, config)?;
    Ok(EstimateResult::median_of(
        values,
        config.scheme.kind(),
        config.eval_count(),
    ))
}

/// Plain-mean baseline over the same replicates as [`median_estimate`]
/// under the same master seed (shared-stream contract: the two results'
/// `replicate_values` are bit-identical).
pub fn mean_estimate<F>(f: &F, config: &EstimatorConfig) -> Result<EstimateResult, NetError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values = replicate_means(f, config)?;
    Ok(EstimateResult::mean_of(
        values,
        config.scheme.kind(),
        config.eval_count(),
    ))
}
