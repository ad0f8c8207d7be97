//! Randomized property suites: grammar round-trips, involutions of the
//! dual and contragredient, Arthur expansion, the triangle-multisegment
//! bijection, and exactness of the block-diagonal embedding under the
//! involution Ad(s).

use num_bigint::BigInt;
use proptest::prelude::*;

use multiseg::certify::restrict_to_chain;
use multiseg::conormal::{
    ad_s_dual, ad_s_point, embed_split, embed_split_dual, is_ad_s_fixed_dual,
    is_ad_s_fixed_point, SplitDescriptor,
};
use multiseg::duality::zelevinsky_dual;
use multiseg::geometry::{triangle_from_multisegment, varieties_of, ChainVariety, DualPoint, Point};
use multiseg::linalg::{Q, QMat};
use multiseg::param::{
    infinitesimal, is_arthur_type, ArthurDecomposition, CuspidalLabel, Exponent, Multisegment,
    Rectangle, Segment,
};
use multiseg::parse::parse_parameter;

fn arb_label() -> impl Strategy<Value = CuspidalLabel> {
    prop_oneof![
        3 => Just(CuspidalLabel::trivial()),
        1 => Just(CuspidalLabel::named("rho")),
        1 => Just(CuspidalLabel::with_dual("rho", "sigma")),
    ]
}

fn arb_multisegment() -> impl Strategy<Value = Multisegment> {
    proptest::collection::vec((arb_label(), -6i64..=6, 1u32..=4), 0..6).prop_map(|parts| {
        Multisegment::new(
            parts
                .into_iter()
                .map(|(label, twice, len)| Segment::new(label, Exponent::from_twice(twice), len))
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn grammar_round_trips(m in arb_multisegment()) {
        let text = m.to_string();
        prop_assert_eq!(parse_parameter(&text).unwrap(), m);
    }

    #[test]
    fn contragredient_is_an_involution(m in arb_multisegment()) {
        prop_assert_eq!(m.contragredient().contragredient(), m);
    }

    #[test]
    fn dual_is_an_involution(m in arb_multisegment()) {
        let once = zelevinsky_dual(&m).dual;
        prop_assert_eq!(zelevinsky_dual(&once).dual, m);
    }

    #[test]
    fn dual_preserves_the_infinitesimal_parameter(m in arb_multisegment()) {
        prop_assert_eq!(infinitesimal(&zelevinsky_dual(&m).dual), infinitesimal(&m));
    }

    #[test]
    fn dual_commutes_with_contragredient(m in arb_multisegment()) {
        prop_assert_eq!(
            zelevinsky_dual(&m.contragredient()).dual,
            zelevinsky_dual(&m).dual.contragredient()
        );
    }

    #[test]
    fn arthur_expansion_round_trips(
        rects in proptest::collection::vec((arb_label(), 1u32..=3, 1u32..=3), 0..4)
    ) {
        let dec = ArthurDecomposition {
            rectangles: rects
                .into_iter()
                .map(|(label, a, b)| Rectangle { label, a, b, x: Exponent::from_int(0) })
                .collect(),
        };
        let phi = dec.expand();
        let found = is_arthur_type(&phi);
        prop_assert!(found.is_some());
        prop_assert_eq!(found.unwrap().expand(), phi);
    }

    #[test]
    fn triangles_and_multisegments_are_in_bijection(m in arb_multisegment()) {
        for chain in varieties_of(&infinitesimal(&m)) {
            let part = restrict_to_chain(&m, &chain);
            let tri = triangle_from_multisegment(&chain, &chain.dims, &part).unwrap();
            prop_assert_eq!(tri.to_multisegment(&chain).unwrap(), part);
        }
    }
}

/// A chain with a split: per slot a ∨-cap in 0..=2 plus an optional
/// α-line, with dims kept positive.
fn arb_chain_split() -> impl Strategy<Value = (ChainVariety, SplitDescriptor)> {
    proptest::collection::vec((0usize..=2, any::<bool>()), 2..=4).prop_map(|slots| {
        let mut vee_dims = Vec::new();
        let mut alpha_slot = Vec::new();
        for (v, a) in slots {
            let v = if v == 0 && !a { 1 } else { v };
            vee_dims.push(v);
            alpha_slot.push(a);
        }
        let dims: Vec<usize> = vee_dims
            .iter()
            .zip(&alpha_slot)
            .map(|(&v, &a)| v + usize::from(a))
            .collect();
        let r = dims.len();
        let exps = (0..r).map(|i| Exponent::from_int((r - 1 - i) as i64)).collect();
        (
            ChainVariety::new(CuspidalLabel::trivial(), exps, dims),
            SplitDescriptor { vee_dims, alpha_slot },
        )
    })
}

fn fill_maps(shapes: &[(usize, usize)], entries: &[i64]) -> Vec<QMat> {
    let mut offset = 0;
    shapes
        .iter()
        .map(|&(rows, cols)| {
            let m = QMat::from_fn(rows, cols, |p, q| {
                Q::from(BigInt::from(entries[offset + p * cols + q]))
            });
            offset += rows * cols;
            m
        })
        .collect()
}

fn point_shapes(dims: &[usize]) -> Vec<(usize, usize)> {
    dims.windows(2).map(|w| (w[1], w[0])).collect()
}

fn dual_shapes(dims: &[usize]) -> Vec<(usize, usize)> {
    dims.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Zero out the entries that Ad(s) negates: the projection of x onto the
/// fixed subspace, which is exactly the image of the embedding ε.
fn block_projection_point(split: &SplitDescriptor, x: &Point) -> Point {
    let flipped = ad_s_point(split, x);
    let half = Q::new(BigInt::from(1), BigInt::from(2));
    let maps = x
        .maps
        .iter()
        .zip(&flipped.maps)
        .map(|(a, b)| QMat::from_fn(a.rows, a.cols, |p, q| (&a[(p, q)] + &b[(p, q)]) * &half))
        .collect();
    Point { maps }
}

fn block_projection_dual(split: &SplitDescriptor, y: &DualPoint) -> DualPoint {
    let flipped = ad_s_dual(split, y);
    let half = Q::new(BigInt::from(1), BigInt::from(2));
    let maps = y
        .maps
        .iter()
        .zip(&flipped.maps)
        .map(|(a, b)| QMat::from_fn(a.rows, a.cols, |p, q| (&a[(p, q)] + &b[(p, q)]) * &half))
        .collect();
    DualPoint { maps }
}

proptest! {
    /// Image of ε lies in the Ad(s)-fixed locus, and every fixed point is
    /// its own block projection (hence lies in the image of ε).
    #[test]
    fn embedding_is_exactly_the_fixed_locus(
        (chain, split, entries) in arb_chain_split().prop_flat_map(|(chain, split)| {
            let count: usize = chain.dims.windows(2).map(|w| w[0] * w[1]).sum();
            (Just(chain), Just(split), proptest::collection::vec(-3i64..=3, count))
        })
    ) {
        let x = Point { maps: fill_maps(&point_shapes(&chain.dims), &entries) };
        let projected = block_projection_point(&split, &x);
        prop_assert!(is_ad_s_fixed_point(&split, &projected));
        prop_assert_eq!(is_ad_s_fixed_point(&split, &x), x == projected);

        let y = DualPoint { maps: fill_maps(&dual_shapes(&chain.dims), &entries) };
        let projected = block_projection_dual(&split, &y);
        prop_assert!(is_ad_s_fixed_dual(&split, &projected));
        prop_assert_eq!(is_ad_s_fixed_dual(&split, &y), y == projected);
    }

    /// ε and its covector counterpart land in the fixed locus for any
    /// block inputs, and are injective (recoverable by projection).
    #[test]
    fn embedded_blocks_are_fixed(
        (chain, split, entries) in arb_chain_split().prop_flat_map(|(chain, split)| {
            let vcount: usize = split.vee_dims.windows(2).map(|w| w[0] * w[1]).sum();
            let ad = split.alpha_dims();
            let acount: usize = ad.windows(2).map(|w| w[0] * w[1]).sum();
            (Just(chain), Just(split), proptest::collection::vec(-3i64..=3, vcount + acount))
        })
    ) {
        let vshapes = point_shapes(&split.vee_dims);
        let ad = split.alpha_dims();
        let ashapes = point_shapes(&ad);
        let vcount: usize = vshapes.iter().map(|&(r, c)| r * c).sum();
        let xv = fill_maps(&vshapes, &entries[..vcount]);
        let xa = fill_maps(&ashapes, &entries[vcount..]);
        let x = embed_split(&chain, &split, &xv, &xa).unwrap();
        prop_assert!(is_ad_s_fixed_point(&split, &x));
        prop_assert_eq!(block_projection_point(&split, &x), x);

        let yv = fill_maps(&dual_shapes(&split.vee_dims), &entries[..vcount]);
        let ya = fill_maps(&dual_shapes(&ad), &entries[vcount..]);
        let y = embed_split_dual(&chain, &split, &yv, &ya).unwrap();
        prop_assert!(is_ad_s_fixed_dual(&split, &y));
        prop_assert_eq!(block_projection_dual(&split, &y), y);
    }
}
