//! Saves a state, resumes it in a later "session", updates it and reloads.
//!
//! ```text
//! cargo run --example persistence
//! ```

use std::error::Error;

use dcas::incremental::{apply_update, UpdateBatch};
use dcas::persistence::{load_from_path, save_to_path, to_bytes};
use dcas::{CharState, CoveringSpace, LoadMode};

const COVERING: &str = include_str!("data/base.cov");
const BATCH: &str = include_str!("data/batch.upd");

fn main() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let first = dir.path().join("base.dcas");
    let second = dir.path().join("next.dcas");

    let state = CharState::build(CoveringSpace::parse(COVERING)?)?;
    let bytes = save_to_path(&state, &first)?;
    println!("saved {} ({bytes} bytes)", first.display());

    // a later session picks up the stored matrices instead of rebuilding them
    let resumed = load_from_path(&first, LoadMode::Verify)?;
    assert_eq!(resumed, state);
    let next = apply_update(&resumed, &UpdateBatch::parse(BATCH)?)?;
    save_to_path(&next, &second)?;

    let reloaded = load_from_path(&second, LoadMode::Trust)?;
    assert_eq!(to_bytes(&reloaded)?, std::fs::read(&second)?);
    println!(
        "reloaded {}: {} objects, {} elements\nPi:\n{}",
        second.display(),
        reloaded.num_objects(),
        reloaded.num_elements(),
        reloaded.pi()
    );

    // one flipped bit in the stored Gamma is caught by the load-time check
    let mut corrupt = std::fs::read(&second)?;
    // Γ and Π close the file, n rows of ceil(n/64) words each
    let n = reloaded.num_objects();
    let gamma_first = corrupt.len() - 2 * n * n.div_ceil(64) * 8;
    corrupt[gamma_first] ^= 0b100;
    match dcas::persistence::from_bytes(&corrupt, LoadMode::Verify) {
        Err(e) => println!("corrupted copy rejected: {e}"),
        Ok(_) => unreachable!("a Gamma flip always changes a derivable entry"),
    }
    Ok(())
}
