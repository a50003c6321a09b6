//! The `dcas` command line.
//!
//! Exit codes: 0 on success, 1 for user or data errors, 2 when the
//! incremental/non-incremental tripwire fires.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bench::{self, Algorithm, GenParams};
use crate::boolmat::BoolMatrix;
use crate::characteristic::{density, ApproxResult, CharState, Operator};
use crate::covering::{CoveringSpace, QuerySet};
use crate::error::{Error, Result};
use crate::incremental::{apply_update_counted, validate_batch_strict, PreparedUpdate, UpdateBatch};
use crate::oracle;
use crate::persistence::{load_from_path, save_to_path, LoadMode};

#[derive(Debug, Parser)]
#[command(
    name = "dcas",
    version,
    about = "Covering approximation spaces with incrementally maintained characteristic matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpArg {
    Sh,
    Sl,
    Xh,
    Xl,
    Ih,
    Il,
    All,
}

impl OpArg {
    fn operators(self) -> Vec<Operator> {
        match self {
            OpArg::Sh => vec![Operator::SH],
            OpArg::Sl => vec![Operator::SL],
            OpArg::Xh => vec![Operator::XH],
            OpArg::Xl => vec![Operator::XL],
            OpArg::Ih => vec![Operator::IH],
            OpArg::Il => vec![Operator::IL],
            OpArg::All => Operator::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a state file from a covering file.
    Build {
        covering: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Approximate a query set.
    Approx {
        state: PathBuf,
        /// Comma-separated object names, or @FILE with one name per line.
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value = "all")]
        op: OpArg,
        /// Also print the 0/1 membership vectors.
        #[arg(long)]
        vector: bool,
        /// Skip re-deriving the stored matrices on load.
        #[arg(long)]
        trust: bool,
        #[arg(long)]
        json: bool,
    },
    /// Apply an update batch incrementally.
    Update {
        state: PathBuf,
        batch: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Require at least two new objects and two new elements, with every
        /// new object in a new element.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        trust: bool,
        #[arg(long)]
        json: bool,
    },
    /// Cross-check a state file against full recomputation and the set definitions.
    Verify {
        state: PathBuf,
        #[arg(long, default_value_t = 20)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Compare the incremental and non-incremental pipelines on random data.
    Bench {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 5)]
        t: usize,
        #[arg(long, default_value_t = 3)]
        l: usize,
        #[arg(long = "ext-prob", default_value_t = 0.2)]
        ext_prob: f64,
        #[arg(long, default_value_t = 1)]
        batches: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write 0 in the nanos column so the CSV is reproducible.
        #[arg(long = "no-wall-time")]
        no_wall_time: bool,
        #[arg(long)]
        json: bool,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e, err);
            match e {
                Error::Tripwire(_) => 2,
                _ => 1,
            }
        }
    }
}

fn report_error(e: &Error, err: &mut dyn Write) {
    match e {
        Error::InvalidCovering(r) => {
            let _ = writeln!(err, "error: invalid covering");
            for v in &r.violations {
                let _ = writeln!(err, "  {v}");
            }
        }
        Error::InvalidBatch(r) => {
            let _ = writeln!(err, "error: invalid update batch");
            for v in &r.violations {
                let _ = writeln!(err, "  {v}");
            }
        }
        other => {
            let _ = writeln!(err, "error: {other}");
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Build {
            covering,
            out: path,
            json,
        } => cmd_build(&covering, &path, json, out),
        Command::Approx {
            state,
            set,
            op,
            vector,
            trust,
            json,
        } => cmd_approx(&state, &set, op, vector, trust, json, out),
        Command::Update {
            state,
            batch,
            out: path,
            strict,
            trust,
            json,
        } => cmd_update(&state, &batch, &path, strict, trust, json, out),
        Command::Verify {
            state,
            queries,
            seed,
            json,
        } => cmd_verify(&state, queries, seed, json, out),
        Command::Bench {
            n,
            m,
            density,
            t,
            l,
            ext_prob,
            batches,
            trials,
            seed,
            csv,
            no_wall_time,
            json,
        } => {
            let params = GenParams {
                n,
                m,
                density,
                t,
                l,
                ext_prob,
                batches,
                seed,
            };
            cmd_bench(&params, trials, csv.as_deref(), !no_wall_time, json, out)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn mode(trust: bool) -> LoadMode {
    if trust {
        LoadMode::Trust
    } else {
        LoadMode::Verify
    }
}

fn cmd_build(covering: &Path, path: &Path, json: bool, out: &mut dyn Write) -> Result<i32> {
    let space = CoveringSpace::parse(&read_text(covering)?)?;
    let state = CharState::build(space)?;
    let bytes = save_to_path(&state, path)?;
    let (dm, dg, dp) = (density(state.matrix()), density(state.gamma()), density(state.pi()));
    if json {
        let v = json!({
            "n": state.num_objects(),
            "m": state.num_elements(),
            "density": { "M": dm, "gamma": dg, "pi": dp },
            "out": path.display().to_string(),
            "bytes": bytes,
        });
        writeln!(out, "{v}")?;
    } else {
        writeln!(out, "n: {}", state.num_objects())?;
        writeln!(out, "m: {}", state.num_elements())?;
        writeln!(out, "density M: {dm:.4}")?;
        writeln!(out, "density gamma: {dg:.4}")?;
        writeln!(out, "density pi: {dp:.4}")?;
        writeln!(out, "wrote {} ({bytes} bytes)", path.display())?;
    }
    Ok(0)
}

/// `a,b,c` inline, or `@path` with one name per line.
pub fn parse_set_arg(arg: &str) -> Result<QuerySet> {
    match arg.strip_prefix('@') {
        Some(path) => {
            let text = read_text(Path::new(path))?;
            Ok(QuerySet::new(
                text.lines()
                    .map(str::trim)
                    .filter(|s| !s.is_empty() && !s.starts_with('#')),
            ))
        }
        None => Ok(QuerySet::parse_list(arg)),
    }
}

fn vector_string(v: &BoolMatrix) -> String {
    (0..v.rows()).map(|i| if v.get(i, 0) { '1' } else { '0' }).collect()
}

fn cmd_approx(
    path: &Path,
    set: &str,
    op: OpArg,
    vector: bool,
    trust: bool,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let state = load_from_path(path, mode(trust))?;
    let query = parse_set_arg(set)?;
    let results = op
        .operators()
        .into_iter()
        .map(|op| state.approx(op, &query))
        .collect::<Result<Vec<ApproxResult>>>()?;
    if json {
        let rs: Vec<Value> = results
            .iter()
            .map(|r| json!({ "op": r.op.as_str(), "members": r.members, "vector": vector_string(&r.vector) }))
            .collect();
        writeln!(
            out,
            "{}",
            json!({ "query": query.members().collect::<Vec<_>>(), "results": rs })
        )?;
    } else {
        for r in &results {
            writeln!(out, "{r}")?;
            if vector {
                writeln!(out, "{} vector: {}", r.op, vector_string(&r.vector))?;
            }
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_update(
    state_path: &Path,
    batch_path: &Path,
    path: &Path,
    strict: bool,
    trust: bool,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let state = load_from_path(state_path, mode(trust))?;
    let batch = UpdateBatch::parse(&read_text(batch_path)?)?;
    if strict {
        // collisions and lenient violations surface first with their own errors
        PreparedUpdate::new(&state, &batch)?;
        let report = validate_batch_strict(&state, &batch);
        if !report.is_ok() {
            return Err(Error::InvalidBatch(report));
        }
    }
    let (next, stats) = apply_update_counted(&state, &batch)?;
    let bytes = save_to_path(&next, path)?;
    if json {
        let v = json!({
            "t": stats.new_objects,
            "l": stats.new_elements,
            "n": next.num_objects(),
            "m": next.num_elements(),
            "ops": {
                "gamma_delta": stats.gamma_delta_ops,
                "gamma_join": stats.gamma_join_ops,
                "pi_delta": stats.pi_delta_ops,
                "pi_meet": stats.pi_meet_ops,
            },
            "out": path.display().to_string(),
            "bytes": bytes,
        });
        writeln!(out, "{v}")?;
    } else {
        writeln!(out, "t: {}", stats.new_objects)?;
        writeln!(out, "l: {}", stats.new_elements)?;
        writeln!(out, "gamma delta ops: {}", stats.gamma_delta_ops)?;
        writeln!(out, "gamma join ops: {}", stats.gamma_join_ops)?;
        writeln!(out, "pi delta ops: {}", stats.pi_delta_ops)?;
        writeln!(out, "pi meet ops: {}", stats.pi_meet_ops)?;
        writeln!(out, "n: {}, m: {}", next.num_objects(), next.num_elements())?;
        writeln!(out, "wrote {} ({bytes} bytes)", path.display())?;
    }
    Ok(0)
}

struct Check {
    name: String,
    detail: Option<String>,
}

fn compare_matrix(space: &CoveringSpace, name: &str, stored: &BoolMatrix, expected: &BoolMatrix) -> Check {
    let detail = stored.diff(expected).ok().and_then(|d| {
        let &(i, j) = d.first()?;
        let objs = space.objects();
        Some(format!(
            "{} differing entries, first ({},{}) stored={} expected={}",
            d.len(),
            objs[i],
            objs[j],
            stored.get(i, j) as u8,
            expected.get(i, j) as u8
        ))
    });
    Check {
        name: name.to_string(),
        detail,
    }
}

/// Runs every verification check on a state.
fn verify_checks(state: &CharState, queries: usize, seed: u64) -> Result<Vec<Check>> {
    let space = state.space();
    let mut checks = Vec::new();
    let m = state.matrix();
    let mt = m.transpose();
    checks.push(compare_matrix(
        space,
        "gamma = M·Mᵀ",
        state.gamma(),
        &m.bool_product(&mt)?,
    ));
    checks.push(compare_matrix(space, "pi = M⊙Mᵀ", state.pi(), &m.odot_product(&mt)?));
    let (g, p) = oracle::oracle_char_matrices(space)?;
    checks.push(compare_matrix(space, "gamma = set definition", state.gamma(), &g));
    checks.push(compare_matrix(space, "pi = set definition", state.pi(), &p));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.num_objects();
    for q in 0..queries {
        let size = rng.gen_range(0..=n);
        let query = QuerySet::from_ids(space, sample(&mut rng, n, size));
        let mut bad = Vec::new();
        for op in [Operator::SH, Operator::SL, Operator::XH, Operator::XL] {
            let fast = state.approx(op, &query)?;
            let slow = oracle::oracle_approx(space, op, &query)?;
            if fast.members != slow.members {
                bad.push(format!(
                    "{op}: matrix {{{}}} vs set {{{}}}",
                    fast.members.join(","),
                    slow.members.join(",")
                ));
            }
        }
        checks.push(Check {
            name: format!("query {} (|X|={size}) SH/SL/XH/XL", q + 1),
            detail: if bad.is_empty() { None } else { Some(bad.join("; ")) },
        });
    }
    Ok(checks)
}

fn cmd_verify(path: &Path, queries: usize, seed: u64, json: bool, out: &mut dyn Write) -> Result<i32> {
    let state = load_from_path(path, LoadMode::Trust)?;
    let checks = verify_checks(&state, queries, seed)?;
    let ok = checks.iter().all(|c| c.detail.is_none());
    if json {
        let cs: Vec<Value> = checks
            .iter()
            .map(|c| json!({ "check": c.name, "pass": c.detail.is_none(), "detail": c.detail }))
            .collect();
        writeln!(out, "{}", json!({ "ok": ok, "checks": cs }))?;
    } else {
        for c in &checks {
            match &c.detail {
                None => writeln!(out, "PASS {}", c.name)?,
                Some(d) => writeln!(out, "FAIL {}: {d}", c.name)?,
            }
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn cmd_bench(
    params: &GenParams,
    trials: usize,
    csv: Option<&Path>,
    wall_time: bool,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let mut records = Vec::new();
    for trial in 0..trials.max(1) {
        let p = GenParams {
            seed: params.seed.wrapping_add(trial as u64),
            ..*params
        };
        records.extend(bench::run_suite(&p)?);
    }
    if let Some(path) = csv {
        fs::write(path, bench::to_csv(&records, wall_time))?;
    }
    let totals: Vec<_> = Algorithm::ALL
        .iter()
        .map(|&a| (a, bench::totals(&records, a)))
        .collect();
    let get = |a: Algorithm| {
        totals
            .iter()
            .find(|(x, _)| *x == a)
            .map(|(_, t)| *t)
            .unwrap_or_default()
    };
    let ics = ratio(get(Algorithm::ICS).maintenance_ops, get(Algorithm::NCS).maintenance_ops);
    let icx = ratio(get(Algorithm::ICX).maintenance_ops, get(Algorithm::NCX).maintenance_ops);
    if json {
        let ts: Vec<Value> = totals
            .iter()
            .map(|(a, t)| {
                json!({
                    "algo": a.to_string(),
                    "maintenance_ops": t.maintenance_ops,
                    "approx_ops": t.approx_ops,
                    "nanos": if wall_time { t.nanos } else { 0 },
                })
            })
            .collect();
        writeln!(
            out,
            "{}",
            json!({ "records": records.len(), "totals": ts, "ics_ncs_ratio": ics, "icx_ncx_ratio": icx })
        )?;
    } else {
        for (a, t) in &totals {
            let nanos = if wall_time { t.nanos } else { 0 };
            writeln!(
                out,
                "{a}: maintenance ops {}, approx ops {}, nanos {nanos}",
                t.maintenance_ops, t.approx_ops
            )?;
        }
        writeln!(out, "ICS/NCS ops ratio: {ics:.4}")?;
        writeln!(out, "ICX/NCX ops ratio: {icx:.4}")?;
        if let Some(path) = csv {
            writeln!(out, "wrote {} ({} rows)", path.display(), records.len() * 3)?;
        }
    }
    Ok(0)
}
