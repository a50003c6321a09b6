//! Random dynamic coverings and a timed comparison of the non-incremental
//! (NCS, NCX) and incremental (ICS, ICX) pipelines.
//!
//! Each pipeline reports three phases: `build` (full product for the
//! non-incremental pipelines; the join into `Γ` for ICS, the per-row pass
//! over old rows of `Π` for ICX), `delta` (the Δ-block products for ICS, the
//! new-row strip for ICX) and `approx` (the two matrix-vector products for
//! the query set). Every phase records the word
//! operation count from [`OpCounter`] and wall time. The counter is the
//! machine-independent measure; the suite also checks that both pipelines
//! produce bitwise identical matrices and approximations and fails loudly
//! if they do not.

use std::fmt;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolmat::{BoolMatrix, OpCounter};
use crate::characteristic::CharState;
use crate::covering::CoveringSpace;
use crate::error::{Error, Result};
use crate::incremental::{update_gamma_counted, NamedSet, PreparedUpdate, UpdateBatch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub m: usize,
    /// Probability that an object joins an element.
    pub density: f64,
    /// New objects per batch.
    pub t: usize,
    /// New elements per batch.
    pub l: usize,
    /// Probability that an old element is extended in a batch.
    pub ext_prob: f64,
    pub batches: usize,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n: 100,
            m: 20,
            density: 0.1,
            t: 5,
            l: 3,
            ext_prob: 0.2,
            batches: 1,
            seed: 1,
        }
    }
}

impl GenParams {
    pub fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.n == 0 || self.m == 0 {
            return bad("n and m must be at least 1");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad("density must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.ext_prob) {
            return bad("ext-prob must be in [0, 1]");
        }
        Ok(())
    }
}

fn fresh_name(prefix: char, start: usize, taken: impl Fn(&str) -> bool) -> impl FnMut() -> String {
    let mut k = start;
    move || loop {
        k += 1;
        let name = format!("{prefix}{k}");
        if !taken(&name) {
            return name;
        }
    }
}

/// A random valid covering of `x1..xn` by `C1..Cm`.
pub fn gen_space(params: &GenParams) -> CoveringSpace {
    gen_space_with(params, &mut ChaCha8Rng::seed_from_u64(params.seed))
}

pub fn gen_space_with(params: &GenParams, rng: &mut impl Rng) -> CoveringSpace {
    let (n, m) = (params.n, params.m);
    let mut members: Vec<Vec<usize>> = (0..m)
        .map(|_| (0..n).filter(|_| rng.gen_bool(params.density)).collect())
        .collect();
    let mut covered = vec![false; n];
    for c in &members {
        for &i in c {
            covered[i] = true;
        }
    }
    for (i, _) in covered.iter().enumerate().filter(|(_, c)| !**c) {
        members[rng.gen_range(0..m)].push(i);
    }
    for c in members.iter_mut().filter(|c| c.is_empty()) {
        c.push(rng.gen_range(0..n));
    }
    let objects: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut space = CoveringSpace::with_objects(objects).expect("distinct names");
    for (j, c) in members.into_iter().enumerate() {
        space.push_element(format!("C{}", j + 1), c).expect("distinct names");
    }
    space
}

/// A random batch that passes lenient validation against `space`.
pub fn gen_batch(space: &CoveringSpace, params: &GenParams, rng: &mut impl Rng) -> UpdateBatch {
    let (n, m, t, l) = (space.num_objects(), space.num_elements(), params.t, params.l);
    let mut next_object = fresh_name('x', n, |s| space.has_object(s));
    let new_objects: Vec<String> = (0..t).map(|_| next_object()).collect();

    // indices: 0..n old objects, n..n+t new ones
    let mut extensions: Vec<(usize, Vec<usize>)> = Vec::new();
    for j in 0..m {
        if t > 0 && rng.gen_bool(params.ext_prob) {
            let mut ext: Vec<usize> = (n..n + t).filter(|_| rng.gen_bool(params.density)).collect();
            if ext.is_empty() {
                ext.push(rng.gen_range(n..n + t));
            }
            extensions.push((j, ext));
        }
    }
    let mut new_elements: Vec<Vec<usize>> = (0..l)
        .map(|_| (0..n + t).filter(|_| rng.gen_bool(params.density)).collect())
        .collect();

    let mut covered = vec![false; t];
    for ids in extensions.iter().map(|e| &e.1).chain(&new_elements) {
        for &i in ids.iter().filter(|&&i| i >= n) {
            covered[i - n] = true;
        }
    }
    for k in (0..t).filter(|&k| !covered[k]) {
        if l > 0 {
            new_elements[rng.gen_range(0..l)].push(n + k);
        } else {
            let j = rng.gen_range(0..m);
            match extensions.iter_mut().find(|e| e.0 == j) {
                Some(e) => e.1.push(n + k),
                None => extensions.push((j, vec![n + k])),
            }
        }
    }
    for c in new_elements.iter_mut().filter(|c| c.is_empty()) {
        c.push(rng.gen_range(0..n + t));
    }

    let name = |i: usize| {
        if i < n {
            space.objects()[i].clone()
        } else {
            new_objects[i - n].clone()
        }
    };
    let mut next_element = fresh_name('C', m, |s| space.has_element(s));
    UpdateBatch {
        extensions: extensions
            .into_iter()
            .map(|(j, ids)| NamedSet::new(space.elements()[j].name.clone(), ids.into_iter().map(name)))
            .collect(),
        new_elements: new_elements
            .into_iter()
            .map(|ids| NamedSet::new(next_element(), ids.into_iter().map(name)))
            .collect(),
        new_objects,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    NCS,
    ICS,
    NCX,
    ICX,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::NCS, Algorithm::ICS, Algorithm::NCX, Algorithm::ICX];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Build,
    Delta,
    Approx,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Build => "build",
            Phase::Delta => "delta",
            Phase::Approx => "approx",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseCost {
    pub phase: Phase,
    pub ops: u64,
    pub nanos: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRecord {
    pub algo: Algorithm,
    /// Size before the batch.
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub l: usize,
    /// Zero-based batch index within the run.
    pub batch: usize,
    pub phases: [PhaseCost; 3],
}

impl BenchRecord {
    pub fn phase(&self, phase: Phase) -> PhaseCost {
        *self
            .phases
            .iter()
            .find(|p| p.phase == phase)
            .expect("all phases present")
    }

    /// Operations spent maintaining the characteristic matrix.
    pub fn maintenance_ops(&self) -> u64 {
        self.phase(Phase::Build).ops + self.phase(Phase::Delta).ops
    }

    pub fn total_nanos(&self) -> u64 {
        self.phases.iter().map(|p| p.nanos).sum()
    }
}

struct Timed {
    ops: OpCounter,
    start: Instant,
}

impl Timed {
    fn start() -> Self {
        Self {
            ops: OpCounter::new(),
            start: Instant::now(),
        }
    }

    fn finish(self, phase: Phase) -> PhaseCost {
        PhaseCost {
            phase,
            ops: self.ops.get(),
            nanos: self.start.elapsed().as_nanos() as u64,
        }
    }
}

fn skipped(phase: Phase) -> PhaseCost {
    PhaseCost {
        phase,
        ops: 0,
        nanos: 0,
    }
}

fn tripwire(what: &str, batch: usize, a: &BoolMatrix, b: &BoolMatrix) -> Result<()> {
    if a == b {
        return Ok(());
    }
    let detail = match a.diff(b) {
        Ok(d) => {
            let shown: Vec<String> = d
                .iter()
                .take(20)
                .map(|&(i, j)| format!("({i},{j}) full={} incremental={}", a.get(i, j) as u8, b.get(i, j) as u8))
                .collect();
            format!("{} divergent entries: {}", d.len(), shown.join(", "))
        }
        Err(_) => format!("shapes {:?} vs {:?}", a.shape(), b.shape()),
    };
    Err(Error::Tripwire(format!("batch {batch}: {what}: {detail}")))
}

fn pair_product(mat: &BoolMatrix, x: &BoolMatrix, ops: &mut OpCounter) -> (BoolMatrix, BoolMatrix) {
    (
        mat.bool_product_counted(x, ops).expect("conformal"),
        mat.odot_product_counted(x, ops).expect("conformal"),
    )
}

/// Runs `params.batches` batches through all four pipelines.
pub fn run_suite(params: &GenParams) -> Result<Vec<BenchRecord>> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut state = CharState::build(gen_space_with(params, &mut rng))?;
    let mut records = Vec::with_capacity(params.batches * 4);

    for b in 0..params.batches {
        let batch = gen_batch(state.space(), params, &mut rng);
        let (n, m) = (state.num_objects(), state.num_elements());
        let (t, l) = (batch.new_objects.len(), batch.new_elements.len());
        let record = |algo, phases| BenchRecord {
            algo,
            n,
            m,
            t,
            l,
            batch: b,
            phases,
        };

        let merged = PreparedUpdate::new(&state, &batch)?.merged_space();
        let query = {
            let size = n + t;
            let mut x = BoolMatrix::zeros(size, 1);
            for i in sample(&mut rng, size, size / 2) {
                x.set(i, 0, true);
            }
            x
        };

        // NCS / NCX: rebuild from M⁺
        let mut full = [BoolMatrix::zeros(0, 0), BoolMatrix::zeros(0, 0)];
        let mut full_approx = Vec::new();
        for (k, algo) in [Algorithm::NCS, Algorithm::NCX].into_iter().enumerate() {
            let mut timer = Timed::start();
            let mp = merged.matrix_rep()?;
            let rows = merged.element_rows();
            full[k] = if k == 0 {
                mp.bool_product_counted(&rows, &mut timer.ops)?
            } else {
                mp.odot_product_counted(&rows, &mut timer.ops)?
            };
            let build = timer.finish(Phase::Build);
            let mut timer = Timed::start();
            full_approx.push(pair_product(&full[k], &query, &mut timer.ops));
            records.push(record(
                algo,
                [build, skipped(Phase::Delta), timer.finish(Phase::Approx)],
            ));
        }

        // ICS: Γ⁺ from Γ and the Δ-blocks
        let mut timer = Timed::start();
        let prepared = PreparedUpdate::new(&state, &batch)?;
        let gd = prepared.gamma_deltas(&mut timer.ops);
        let delta = timer.finish(Phase::Delta);
        let mut timer = Timed::start();
        let gamma = update_gamma_counted(state.gamma(), &gd, &mut timer.ops)?;
        let build = timer.finish(Phase::Build);
        let mut timer = Timed::start();
        let second = pair_product(&gamma, &query, &mut timer.ops);
        records.push(record(Algorithm::ICS, [build, delta, timer.finish(Phase::Approx)]));

        // ICX: Π⁺ from Π and the Δ-blocks
        let mut timer = Timed::start();
        let prepared = PreparedUpdate::new(&state, &batch)?;
        let strip = prepared.pi_strip(&mut timer.ops);
        let delta = timer.finish(Phase::Delta);
        let mut timer = Timed::start();
        let pi = prepared.finish_pi(&strip, &mut timer.ops);
        let build = timer.finish(Phase::Build);
        let mut timer = Timed::start();
        let sixth = pair_product(&pi, &query, &mut timer.ops);
        records.push(record(Algorithm::ICX, [build, delta, timer.finish(Phase::Approx)]));

        tripwire("gamma", b, &full[0], &gamma)?;
        tripwire("pi", b, &full[1], &pi)?;
        tripwire("SH", b, &full_approx[0].0, &second.0)?;
        tripwire("SL", b, &full_approx[0].1, &second.1)?;
        tripwire("XH", b, &full_approx[1].0, &sixth.0)?;
        tripwire("XL", b, &full_approx[1].1, &sixth.1)?;

        state = prepared.into_state(gamma, pi);
    }
    Ok(records)
}

pub const CSV_HEADER: &str = "algo,n,m,t,l,phase,ops,nanos";

/// One row per (record, phase). With `wall_time` off the `nanos` column is
/// written as 0, which makes the output reproducible byte for byte.
pub fn to_csv(records: &[BenchRecord], wall_time: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        for p in &r.phases {
            let nanos = if wall_time { p.nanos } else { 0 };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.algo, r.n, r.m, r.t, r.l, p.phase, p.ops, nanos
            ));
        }
    }
    out
}

/// Per-algorithm sums of maintenance ops and wall time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub maintenance_ops: u64,
    pub approx_ops: u64,
    pub nanos: u64,
}

pub fn totals(records: &[BenchRecord], algo: Algorithm) -> Totals {
    records
        .iter()
        .filter(|r| r.algo == algo)
        .fold(Totals::default(), |acc, r| Totals {
            maintenance_ops: acc.maintenance_ops + r.maintenance_ops(),
            approx_ops: acc.approx_ops + r.phase(Phase::Approx).ops,
            nanos: acc.nanos + r.total_nanos(),
        })
}
