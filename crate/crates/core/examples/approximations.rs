//! Lower and upper approximations of a query set, six operators side by side.
//!
//! ```text
//! cargo run --example approximations [-- x3,x4]
//! ```

use std::error::Error;

use dcas::oracle::oracle_approx;
use dcas::{CharState, CoveringSpace, Operator, QuerySet};

const COVERING: &str = include_str!("data/base.cov");

fn main() -> Result<(), Box<dyn Error>> {
    let state = CharState::build(CoveringSpace::parse(COVERING)?)?;
    let query = QuerySet::parse_list(&std::env::args().nth(1).unwrap_or_else(|| "x3,x4".into()));
    println!("X = {{{}}}", query.members().collect::<Vec<_>>().join(","));

    for op in Operator::ALL {
        let r = state.approx(op, &query)?;
        // SH/SL/XH/XL come from a matrix-vector product; IH/IL from set unions
        let check = oracle_approx(state.space(), op, &query)?;
        assert_eq!(r.members, check.members);
        let bits: String = (0..r.vector.rows())
            .map(|i| if r.vector.get(i, 0) { '1' } else { '0' })
            .collect();
        println!("{r:<24} {bits}");
    }
    Ok(())
}
