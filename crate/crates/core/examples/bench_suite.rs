//! Runs the four pipelines on random dynamic coverings and prints the
//! word-operation totals.
//!
//! ```text
//! cargo run --release --example bench_suite [-- N M T L]
//! ```

use std::error::Error;

use dcas::bench::{run_suite, to_csv, totals, Algorithm, GenParams};

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let get = |i: usize, d: usize| args.get(i).copied().unwrap_or(d);
    let params = GenParams {
        n: get(0, 500),
        m: get(1, 50),
        t: get(2, 10),
        l: get(3, 5),
        batches: 3,
        ..GenParams::default()
    };
    let records = run_suite(&params)?;
    for algo in Algorithm::ALL {
        let t = totals(&records, algo);
        println!(
            "{algo}: maintenance {:>9} ops, approximation {:>9} ops, {:>8} µs",
            t.maintenance_ops,
            t.approx_ops,
            t.nanos / 1000
        );
    }
    let ratio = |a, b| totals(&records, a).maintenance_ops as f64 / totals(&records, b).maintenance_ops as f64;
    println!(
        "ICS/NCS {:.3}  ICX/NCX {:.3}",
        ratio(Algorithm::ICS, Algorithm::NCS),
        ratio(Algorithm::ICX, Algorithm::NCX)
    );
    print!("\n{}", to_csv(&records[..4], false));
    Ok(())
}
