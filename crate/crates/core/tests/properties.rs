mod common;

use common::*;
use dcas::characteristic::CharState;
use dcas::incremental::{apply_update, gamma_deltas, pi_deltas, update_gamma, update_pi};
use dcas::oracle::{oracle_approx, oracle_char_matrices};
use dcas::persistence::{from_bytes, to_bytes};
use dcas::{BoolMatrix, CoveringSpace, LoadMode, Operator, QuerySet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = BoolMatrix> {
    proptest::collection::vec(any::<bool>(), rows * cols)
        .prop_map(move |bits| BoolMatrix::from_fn(rows, cols, |i, j| bits[i * cols + j]))
}

fn product_operands(max: usize) -> impl Strategy<Value = (BoolMatrix, BoolMatrix)> {
    (0..=max, 0..=max, 0..=max).prop_flat_map(|(r, k, c)| (matrix(r, k), matrix(k, c)))
}

/// Wide operands so rows span several words.
fn wide_operands() -> impl Strategy<Value = (BoolMatrix, BoolMatrix)> {
    (1..=4usize, 60..=140usize, 60..=140usize).prop_flat_map(|(r, k, c)| (matrix(r, k), matrix(k, c)))
}

/// A covering plus a query set, both drawn from a seed.
fn space_and_query(max_n: usize, max_m: usize) -> impl Strategy<Value = (CoveringSpace, QuerySet)> {
    (
        1..=max_n,
        1..=max_m,
        0.1f64..0.8,
        any::<u64>(),
        proptest::collection::vec(any::<bool>(), max_n),
    )
        .prop_map(|(n, m, p, seed, bits)| {
            let space = random_space(&mut ChaCha8Rng::seed_from_u64(seed), n, m, p);
            let x = QuerySet::from_ids(&space, (0..n).filter(|&i| bits[i]));
            (space, x)
        })
}

fn members(state: &CharState, op: Operator, x: &QuerySet) -> Vec<String> {
    state.approx(op, x).unwrap().members
}

fn complement(space: &CoveringSpace, x: &QuerySet) -> QuerySet {
    QuerySet::new(
        space
            .objects()
            .iter()
            .filter(|o| !x.members().any(|m| m == o.as_str()))
            .cloned(),
    )
}

fn is_subset(a: &[String], b: &[String]) -> bool {
    a.iter().all(|x| b.contains(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn products_match_triple_loop((a, b) in product_operands(6)) {
        prop_assert_eq!(a.bool_product(&b).unwrap(), naive_product(&a, &b));
        prop_assert_eq!(a.odot_product(&b).unwrap(), naive_odot(&a, &b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn products_match_across_words((a, b) in wide_operands()) {
        let p = a.bool_product(&b).unwrap();
        let q = a.odot_product(&b).unwrap();
        prop_assert!(p.padding_is_zero() && q.padding_is_zero());
        prop_assert_eq!(p, naive_product(&a, &b));
        prop_assert_eq!(q, naive_odot(&a, &b));
    }

    #[test]
    fn identity_laws(a in (0..=8usize, 0..=8usize).prop_flat_map(|(r, c)| matrix(r, c))) {
        let left = BoolMatrix::identity(a.rows());
        prop_assert_eq!(left.bool_product(&a).unwrap(), a.clone());
        prop_assert_eq!(a.bool_product(&BoolMatrix::identity(a.cols())).unwrap(), a.clone());
        prop_assert_eq!(left.odot_product(&a).unwrap(), a);
    }

    #[test]
    fn products_are_monotone((a, b) in product_operands(6), extra in any::<u64>()) {
        // a ≤ a2 entrywise: the Boolean product grows, ⊙ shrinks in its left argument
        let a2 = BoolMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j) || (extra >> ((i * 7 + j) % 64)) & 1 == 1);
        let p = a.bool_product(&b).unwrap();
        let p2 = a2.bool_product(&b).unwrap();
        prop_assert!(p.is_subset_of(&p2));
        let q = a.odot_product(&b).unwrap();
        let q2 = a2.odot_product(&b).unwrap();
        prop_assert!(q2.is_subset_of(&q));
    }

    #[test]
    fn characteristic_matrices_match_definitions((space, _) in space_and_query(12, 6)) {
        let state = CharState::build(space.clone()).unwrap();
        let (g, p) = naive_char(&space);
        prop_assert_eq!(state.gamma(), &g);
        prop_assert_eq!(state.pi(), &p);
        let (og, op) = oracle_char_matrices(&space).unwrap();
        prop_assert_eq!(state.gamma(), &og);
        prop_assert_eq!(state.pi(), &op);
        prop_assert_eq!(state.gamma().transpose(), g.clone());
        prop_assert!(state.pi().is_subset_of(state.gamma()));
        for i in 0..space.num_objects() {
            prop_assert!(g.get(i, i) && p.get(i, i));
        }
    }

    #[test]
    fn approximations_match_oracle((space, x) in space_and_query(10, 6)) {
        let state = CharState::build(space.clone()).unwrap();
        for op in Operator::ALL {
            let slow = oracle_approx(&space, op, &x).unwrap().members;
            prop_assert_eq!(members(&state, op, &x), slow, "{}", op);
        }
    }

    #[test]
    fn lower_and_upper_are_dual((space, x) in space_and_query(10, 6)) {
        let state = CharState::build(space.clone()).unwrap();
        let xc = complement(&space, &x);
        for (hi, lo) in [(Operator::SH, Operator::SL), (Operator::XH, Operator::XL)] {
            let upper_c = members(&state, hi, &xc);
            let lower = members(&state, lo, &x);
            let expect: Vec<String> = space.objects().iter().filter(|o| !upper_c.contains(o)).cloned().collect();
            prop_assert_eq!(lower, expect);
        }
    }

    #[test]
    fn lower_within_set_within_upper((space, x) in space_and_query(10, 6)) {
        let state = CharState::build(space.clone()).unwrap();
        let xs: Vec<String> = x.members().map(String::from).collect();
        for (hi, lo) in [(Operator::SH, Operator::SL), (Operator::XH, Operator::XL)] {
            prop_assert!(is_subset(&members(&state, lo, &x), &xs));
            prop_assert!(is_subset(&xs, &members(&state, hi, &x)));
        }
        // the sixth pair is the tighter one
        prop_assert!(is_subset(&members(&state, Operator::XH, &x), &members(&state, Operator::SH, &x)));
        prop_assert!(is_subset(&members(&state, Operator::SL, &x), &members(&state, Operator::XL, &x)));
    }

    #[test]
    fn approximations_are_monotone((space, x) in space_and_query(10, 6), drop in any::<u64>()) {
        let state = CharState::build(space.clone()).unwrap();
        let smaller = QuerySet::new(x.members().enumerate().filter(|(i, _)| (drop >> (i % 64)) & 1 == 0).map(|(_, m)| m.to_string()));
        for op in [Operator::SH, Operator::SL, Operator::XH, Operator::XL] {
            prop_assert!(is_subset(&members(&state, op, &smaller), &members(&state, op, &x)), "{}", op);
        }
    }

    #[test]
    fn partitions_are_exact(n in 1..=12usize, blocks in 1..=4usize, seed in any::<u64>(), bits in any::<u16>()) {
        // each object in exactly one block: every approximation pair collapses
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = blocks.min(n);
        let mut owner: Vec<usize> = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
        owner[..blocks].copy_from_slice(&(0..blocks).collect::<Vec<_>>());
        let objects: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();
        let elements: Vec<(String, Vec<String>)> = (0..blocks)
            .map(|b| (format!("B{b}"), (0..n).filter(|&i| owner[i] == b).map(|i| objects[i].clone()).collect()))
            .collect();
        let space = CoveringSpace::new(&objects, &elements).unwrap();
        let state = CharState::build(space.clone()).unwrap();
        prop_assert_eq!(state.gamma(), state.pi());
        let x = QuerySet::from_ids(&space, (0..n).filter(|&i| (bits >> (i % 16)) & 1 == 1));
        prop_assert_eq!(members(&state, Operator::SH, &x), members(&state, Operator::XH, &x));
        prop_assert_eq!(members(&state, Operator::SL, &x), members(&state, Operator::XL, &x));
    }

    #[test]
    fn incremental_matches_rebuild(seed in any::<u64>(), n in 1..=40usize, m in 1..=12usize, t in 0..=6usize, l in 0..=4usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, n, m, 0.25);
        let batch = random_batch(&mut rng, &space, t, l, "n");
        let state = CharState::build(space.clone()).unwrap();
        let full = CharState::build(merged_space(&space, &batch)).unwrap();
        let gamma = update_gamma(state.gamma(), &gamma_deltas(&state, &batch).unwrap()).unwrap();
        let pi = update_pi(state.pi(), &pi_deltas(&state, &batch).unwrap()).unwrap();
        prop_assert_eq!(&gamma, full.gamma());
        prop_assert_eq!(&pi, full.pi());
        // top-left blocks: Γ can only gain entries, Π can only lose them
        prop_assert!(state.gamma().is_subset_of(&gamma.submatrix(0..n, 0..n)));
        prop_assert!(pi.submatrix(0..n, 0..n).is_subset_of(state.pi()));
        // extensions hold only new objects, so only new elements reach the old block
        let touches_old = batch.new_elements.iter().any(|e| e.members.iter().any(|o| space.has_object(o)));
        if !touches_old {
            prop_assert_eq!(&gamma.submatrix(0..n, 0..n), state.gamma());
            prop_assert_eq!(&pi.submatrix(0..n, 0..n), state.pi());
        }
    }

    #[test]
    fn wide_updates_match_rebuild(seed in any::<u64>(), n in 50..=150usize, m in 1..=8usize, t in 0..=80usize, l in 0..=3usize) {
        // n and n + t straddle word boundaries
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, n, m, 0.2);
        let batch = random_batch(&mut rng, &space, t, l, "w");
        let next = apply_update(&CharState::build(space.clone()).unwrap(), &batch).unwrap();
        let full = CharState::build(merged_space(&space, &batch)).unwrap();
        prop_assert_eq!(next, full);
    }

    #[test]
    fn state_bytes_round_trip(seed in any::<u64>(), n in 1..=30usize, m in 1..=8usize) {
        let space = random_space(&mut ChaCha8Rng::seed_from_u64(seed), n, m, 0.3);
        let state = CharState::build(space).unwrap();
        let bytes = to_bytes(&state).unwrap();
        let back = from_bytes(&bytes, LoadMode::Verify).unwrap();
        prop_assert_eq!(to_bytes(&back).unwrap(), bytes);
        prop_assert_eq!(back, state);
    }

    #[test]
    fn gamma_and_pi_flips_are_caught(seed in any::<u64>(), n in 1..=16usize, m in 1..=6usize, which in 0..2usize, pos in any::<(usize, usize)>()) {
        let space = random_space(&mut ChaCha8Rng::seed_from_u64(seed), n, m, 0.3);
        let state = CharState::build(space).unwrap();
        let mut bytes = to_bytes(&state).unwrap();
        // Γ and Π sit at the end, n words each (n ≤ 64)
        let word = bytes.len() - (2 - which) * n * 8 + (pos.0 % n) * 8;
        let bit = pos.1 % 64;
        bytes[word + bit / 8] ^= 1 << (bit % 8);
        prop_assert!(from_bytes(&bytes, LoadMode::Verify).is_err());
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = from_bytes(&bytes, LoadMode::Verify);
        let mut framed = b"DCAS1".to_vec();
        framed.extend_from_slice(&bytes);
        let _ = from_bytes(&framed, LoadMode::Trust);
    }
}

#[test]
fn chained_updates_match_rebuild() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let space = random_space(&mut rng, 20, 6, 0.3);
    let mut state = CharState::build(space.clone()).unwrap();
    let mut spelled = space;
    for k in 0..8 {
        let batch = random_batch(&mut rng, state.space(), k % 3, (k + 1) % 3, &format!("c{k}"));
        spelled = merged_space(&spelled, &batch);
        state = apply_update(&state, &batch).unwrap();
        let full = CharState::build(spelled.clone()).unwrap();
        assert_eq!(state, full, "after batch {k}");
    }
}
