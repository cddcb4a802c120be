//! Randomized property checks over the public API: algebraic laws that must
//! hold at every size, not just the exhaustively tested small ones.

use std::sync::Arc;

use medianqmc::estimator::EstimateResult;
use medianqmc::gf2::{matmul_gf2, matvec, vecmat, BitMatrix, BitVectorE};
use medianqmc::netgen::{
    code_to_unit, generate_points, randomize, DirectionNumbers, GeneratingMatrixSet, PointStream,
    RandomizationScheme, SchemeKind,
};
use medianqmc::rng::SeedTree;
use medianqmc::testfns::ProductTestFunction;
use medianqmc::theory::{enumerate_k_u_t, in_k_u_t, SmoothnessParams};
use medianqmc::walsh::{wal, WalshIndex};
use proptest::prelude::*;

fn mask(e: u32) -> u64 {
    if e == 64 {
        u64::MAX
    } else {
        (1u64 << e) - 1
    }
}

proptest! {
    #[test]
    fn matvec_is_linear_at_every_size(
        e in 1u32..=64,
        cols in prop::collection::vec(any::<u64>(), 1..=32),
        a in any::<u64>(),
        b in any::<u64>(),
    ) {
        let m = BitMatrix::from_cols(cols.iter().map(|c| c & mask(e)).collect(), e);
        let nc = m.ncols();
        let va = BitVectorE::new(a & mask(nc), nc);
        let vb = BitVectorE::new(b & mask(nc), nc);
        let vab = BitVectorE::new((a ^ b) & mask(nc), nc);
        prop_assert_eq!(
            matvec(&m, vab).bits(),
            matvec(&m, va).bits() ^ matvec(&m, vb).bits()
        );
    }

    #[test]
    fn row_action_associates_with_matmul(
        e in 1u32..=16,
        mid in 1u32..=16,
        p in 1u32..=16,
        acols in prop::collection::vec(any::<u64>(), 16),
        bcols in prop::collection::vec(any::<u64>(), 16),
        k in any::<u64>(),
    ) {
        let a = BitMatrix::from_cols(
            acols[..mid as usize].iter().map(|c| c & mask(e)).collect(),
            e,
        );
        let b = BitMatrix::from_cols(
            bcols[..p as usize].iter().map(|c| c & mask(mid)).collect(),
            mid,
        );
        let kv = BitVectorE::new(k & mask(e), e);
        let left = vecmat(vecmat(kv, &a), &b);
        let right = vecmat(kv, &matmul_gf2(&a, &b));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn code_to_unit_truncates_into_unit_interval(code in any::<u64>()) {
        let x = code_to_unit(code);
        prop_assert!((0.0..1.0).contains(&x));
        // exact: x carries the top 53 code bits and nothing else
        prop_assert_eq!((x * 2f64.powi(53)) as u64, code >> 11);
    }

    #[test]
    fn wal_is_multiplicative_over_xor(
        k1 in any::<u64>(),
        k2 in any::<u64>(),
        x in any::<u64>(),
    ) {
        prop_assert_eq!(wal(k1 ^ k2, x), wal(k1, x) * wal(k2, x));
    }

    #[test]
    fn protected_set_membership_is_monotone_in_t(
        comps in prop::collection::vec(0u64..(1u64 << 16), 1..=4),
        alpha in 0u32..=2,
        lambda_ix in 0usize..4,
        t in -4.0f64..40.0,
        dt in 0.0f64..20.0,
    ) {
        prop_assume!(comps.iter().any(|&k| k != 0));
        let idx = WalshIndex::new(comps);
        let p = SmoothnessParams::new(alpha, [0.25, 0.5, 0.75, 1.0][lambda_ix]);
        if in_k_u_t(&idx, &p, t) {
            prop_assert!(in_k_u_t(&idx, &p, t + dt));
        }
    }

    #[test]
    fn protected_set_counts_are_monotone_in_t(
        alpha in 0u32..=1,
        lambda_ix in 0usize..2,
        t in 0.0f64..6.0,
        dt in 0.0f64..3.0,
    ) {
        let p = SmoothnessParams::new(alpha, [0.5, 1.0][lambda_ix]);
        prop_assert!(enumerate_k_u_t(2, &p, t, 6) <= enumerate_k_u_t(2, &p, t + dt, 6));
    }

    #[test]
    fn median_is_permutation_invariant_and_within_range(
        (values, shuffled) in prop::collection::vec(-1e12f64..1e12, 1..=41)
            .prop_map(|mut v| {
                if v.len() % 2 == 0 {
                    v.pop(); // replicate counts are always odd (2r−1)
                }
                v
            })
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
    ) {
        let med = EstimateResult::median_of(values.clone(), SchemeKind::Rls, 1).value;
        let reshuffled = EstimateResult::median_of(shuffled, SchemeKind::Rls, 1).value;
        prop_assert_eq!(med, reshuffled);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= med && med <= hi);
    }

    #[test]
    fn incremental_stream_matches_reference_generation(
        s in 1u32..=6,
        m in 1u32..=8,
        seed in any::<u64>(),
        scheme_ix in 0usize..3,
    ) {
        let base = Arc::new(
            GeneratingMatrixSet::sobol(s, m, DirectionNumbers::embedded()).unwrap(),
        );
        let scheme = match scheme_ix {
            0 => RandomizationScheme::Rls(base),
            1 => RandomizationScheme::Crd,
            _ => RandomizationScheme::ShiftOnly(base),
        };
        let net = randomize(&scheme, s, m, &SeedTree::new(seed)).unwrap();
        let reference = generate_points(&net);
        let streamed = PointStream::new(&net).collect_block();
        prop_assert_eq!(reference.num_points(), streamed.num_points());
        for i in 0..reference.num_points() {
            for j in 0..s {
                prop_assert_eq!(reference.code(i, j), streamed.code(i, j), "i={} j={}", i, j);
            }
        }
    }

    #[test]
    fn relative_variation_multiplies_over_disjoint_blocks(
        mask1 in 1u32..(1u32 << 10),
        mask2 in 1u32..(1u32 << 10),
        gamma in 0.0f64..5.0,
    ) {
        let mask2 = mask2 & !mask1;
        prop_assume!(mask2 != 0);
        let coords = |m: u32| (1..=10u32).filter(|j| m >> (j - 1) & 1 == 1).collect::<Vec<_>>();
        let f = ProductTestFunction::new(10, gamma, 0);
        let u1 = coords(mask1);
        let u2 = coords(mask2);
        let mut joint = [u1.clone(), u2.clone()].concat();
        joint.sort_unstable();
        let lhs = f.relative_variation(&joint);
        let rhs = f.relative_variation(&u1) * f.relative_variation(&u2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(rhs));
    }
}
