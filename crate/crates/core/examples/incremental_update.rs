//! Adds objects and elements to a covering and maintains both characteristic
//! matrices from the delta blocks, then compares against a rebuild.
//!
//! ```text
//! cargo run --example incremental_update
//! ```

use std::error::Error;

use dcas::incremental::{apply_update_counted, gamma_deltas, pi_deltas, UpdateBatch};
use dcas::{CharState, CoveringSpace, OpCounter, Operator, QuerySet};

const COVERING: &str = include_str!("data/base.cov");
const BATCH: &str = include_str!("data/batch.upd");

fn main() -> Result<(), Box<dyn Error>> {
    let state = CharState::build(CoveringSpace::parse(COVERING)?)?;
    let batch = UpdateBatch::parse(BATCH)?;
    print!("batch:\n{}", batch.to_text());

    let g = gamma_deltas(&state, &batch)?;
    println!(
        "\nGamma blocks\nΔ1:\n{}\nΔ2:\n{}\nΔ3:\n{}",
        g.delta1, g.delta2, g.delta3
    );
    let p = pi_deltas(&state, &batch)?;
    println!(
        "\nPi blocks\nΔ1:\n{}\nΔ2:\n{}\nΔ3:\n{}\nΔ4:\n{}",
        p.delta1, p.delta2, p.delta3, p.delta4
    );

    let (next, stats) = apply_update_counted(&state, &batch)?;
    println!("\nGamma+:\n{}\n\nPi+:\n{}", next.gamma(), next.pi());

    let (mut gamma_ops, mut pi_ops) = (OpCounter::new(), OpCounter::new());
    let rebuilt = CharState::build_counted(next.space().clone(), &mut gamma_ops, &mut pi_ops)?;
    assert_eq!(rebuilt, next);
    println!(
        "\nword ops: gamma {} incremental vs {} rebuild, pi {} vs {}",
        stats.gamma_delta_ops + stats.gamma_join_ops,
        gamma_ops.get(),
        stats.pi_delta_ops + stats.pi_meet_ops,
        pi_ops.get()
    );

    let x = QuerySet::new(["x3", "x4", "x5"]);
    for op in [Operator::SH, Operator::SL, Operator::XH, Operator::XL] {
        println!("{}", next.approx(op, &x)?);
    }
    Ok(())
}
