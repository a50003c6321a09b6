//! Compares the matrix path against the set-theoretic definitions on random
//! coverings.
//!
//! ```text
//! cargo run --release --example oracle_cross_check [-- SEED]
//! ```

use std::error::Error;

use dcas::bench::{gen_space_with, GenParams};
use dcas::oracle::{oracle_approx, oracle_char_matrices};
use dcas::{CharState, Operator, QuerySet};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut spaces, mut queries) = (0, 0);
    for _ in 0..100 {
        let params = GenParams {
            n: rng.gen_range(1..=30),
            m: rng.gen_range(1..=8),
            density: rng.gen_range(0.05..0.6),
            ..GenParams::default()
        };
        let space = gen_space_with(&params, &mut rng);
        let state = CharState::build(space.clone())?;
        assert_eq!(
            oracle_char_matrices(&space)?,
            (state.gamma().clone(), state.pi().clone())
        );
        for _ in 0..20 {
            let n = space.num_objects();
            let k = rng.gen_range(0..=n);
            let x = QuerySet::from_ids(&space, sample(&mut rng, n, k));
            for op in [Operator::SH, Operator::SL, Operator::XH, Operator::XL] {
                assert_eq!(state.approx(op, &x)?.members, oracle_approx(&space, op, &x)?.members);
            }
            queries += 1;
        }
        spaces += 1;
    }
    println!("seed {seed}: {spaces} coverings, {queries} query sets, matrix and set answers agree");
    Ok(())
}
