//! Randomized structural checks: small groups and randomly generated group
//! codes over Z2 and V4.

use gsys::algebra::{
    is_normal, is_subgroup, quotient, set_product, validate_group, ElementSet, FiniteGroup,
};
use gsys::chains::verify_chain_properties;
use gsys::encoder::{analyze, decode_path, encode_path};
use gsys::signature::verify_signature_sequence;
use gsys::system::BlockCode;
use proptest::prelude::*;
use std::sync::Arc;

fn z2() -> Arc<FiniteGroup> {
    Arc::new(validate_group("Z2", vec![vec![0, 1], vec![1, 0]]).unwrap())
}

fn v4() -> Arc<FiniteGroup> {
    let table = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
    Arc::new(validate_group("V4", table).unwrap())
}

fn z4() -> Arc<FiniteGroup> {
    let table = (0..4)
        .map(|a| (0..4).map(|b| (a + b) % 4).collect())
        .collect();
    Arc::new(validate_group("Z4", table).unwrap())
}

fn s3() -> Arc<FiniteGroup> {
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let compose = |p: &[usize; 3], q: &[usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
    let idx = |r: [usize; 3]| perms.iter().position(|p| *p == r).unwrap();
    let table = perms
        .iter()
        .map(|p| perms.iter().map(|q| idx(compose(p, q))).collect())
        .collect();
    Arc::new(validate_group("S3", table).unwrap())
}

fn group_by_id(id: usize) -> Arc<FiniteGroup> {
    match id {
        0 => z2(),
        1 => v4(),
        2 => z4(),
        _ => s3(),
    }
}

/// A random generator-closed code: alphabet, window length and a handful of
/// generator words.
fn code_strategy() -> impl Strategy<Value = Arc<BlockCode>> {
    (0usize..2, 2usize..=4)
        .prop_flat_map(|(aid, len)| {
            let order: usize = if aid == 0 { 2 } else { 4 };
            (
                Just(aid),
                Just(len),
                prop::collection::vec(prop::collection::vec(0..order, len), 1..=3),
            )
        })
        .prop_map(|(aid, len, gens)| {
            let alphabet = if aid == 0 { z2() } else { v4() };
            BlockCode::new("random", vec![alphabet; len], gens, true, false).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn generated_subsets_are_subgroups(id in 0usize..4, gens in prop::collection::vec(0usize..6, 0..3)) {
        let g = group_by_id(id);
        let gens: Vec<usize> = gens.into_iter().map(|x| x % g.order).collect();
        let h = ElementSet::new(&g, g.generated_subgroup(&gens));
        prop_assert!(is_subgroup(&h));
        prop_assert_eq!(g.order % h.len(), 0);
        if is_normal(&h) {
            let q = quotient(&g, &h).unwrap();
            prop_assert_eq!(q.quotient.order * h.len(), g.order);
            // The projection respects the product.
            for a in 0..g.order {
                for b in 0..g.order {
                    let lhs = q.projection[g.mul(a, b)];
                    let rhs = q.quotient.mul(q.projection[a], q.projection[b]);
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn subgroup_products_obey_order_formula(
        id in 0usize..4,
        ga in prop::collection::vec(0usize..6, 0..2),
        gb in prop::collection::vec(0usize..6, 0..2),
    ) {
        let g = group_by_id(id);
        let ga: Vec<usize> = ga.into_iter().map(|x| x % g.order).collect();
        let gb: Vec<usize> = gb.into_iter().map(|x| x % g.order).collect();
        let h = ElementSet::new(&g, g.generated_subgroup(&ga));
        let k = ElementSet::new(&g, g.generated_subgroup(&gb));
        if is_normal(&h) || is_normal(&k) {
            let hk = set_product(&h, &k).unwrap();
            prop_assert!(is_subgroup(&hk));
            // |HK| * |H ∩ K| = |H| * |K|.
            let inter: Vec<usize> = h.members.iter().copied().filter(|&x| k.contains(x)).collect();
            prop_assert_eq!(hk.len() * inter.len(), h.len() * k.len());
        }
    }

    #[test]
    fn random_codes_have_sound_trellises(code in code_strategy()) {
        let ctx = analyze(&code).unwrap();
        let cert = verify_chain_properties(&ctx.trellis, ctx.ell);
        prop_assert!(cert.all_pass(), "{}", cert.render());
        for c in 0..code.words.len() {
            let tensor = decode_path(&ctx, c).unwrap();
            prop_assert_eq!(encode_path(&ctx, &tensor).unwrap(), c);
        }
        let cert = verify_signature_sequence(&ctx);
        prop_assert!(cert.all_pass(), "{}", cert.render());
    }

    #[test]
    fn generator_counts_multiply_to_code_size(code in code_strategy()) {
        let ctx = analyze(&code).unwrap();
        let mut product = 1usize;
        for fam in ctx.basis.families.values() {
            product *= fam.words.len();
        }
        prop_assert_eq!(product, code.words.len());
    }
}
