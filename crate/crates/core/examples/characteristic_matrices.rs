//! Builds the characteristic matrices of a covering file.
//!
//! ```text
//! cargo run --example characteristic_matrices [-- path/to/covering.cov]
//! ```

use std::error::Error;

use dcas::{CharState, CoveringSpace};

fn main() -> Result<(), Box<dyn Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/base.cov").into());
    let space = CoveringSpace::parse(&std::fs::read_to_string(&path)?)?;
    let state = CharState::build(space)?;
    let space = state.space();

    println!("{} objects, {} elements", space.num_objects(), space.num_elements());
    println!("\nM (objects x elements):\n{}", state.matrix());
    println!(
        "\nGamma = M·Mᵀ, (i,j) set when some element holds both:\n{}",
        state.gamma()
    );
    println!("\nPi = M⊙Mᵀ, row i is the neighborhood of object i:\n{}", state.pi());

    println!("\nneighborhoods:");
    for x in space.objects() {
        println!("  N({x}) = {{{}}}", space.neighborhood(x)?.join(","));
    }
    Ok(())
}
