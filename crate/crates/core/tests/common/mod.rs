#![allow(dead_code)]

use std::collections::BTreeSet;

use dcas::incremental::{NamedSet, UpdateBatch};
use dcas::{BoolMatrix, CoveringSpace};
use rand::seq::SliceRandom;
use rand::Rng;

pub const BASE: &str = include_str!("../../examples/data/base.cov");
pub const BATCH: &str = include_str!("../../examples/data/batch.upd");

pub fn base_space() -> CoveringSpace {
    CoveringSpace::parse(BASE).unwrap()
}

pub fn batch() -> UpdateBatch {
    UpdateBatch::parse(BATCH).unwrap()
}

pub fn mat(rows: &str) -> BoolMatrix {
    rows.parse().unwrap()
}

/// Triple-loop Boolean product on plain vectors.
pub fn naive_product(a: &BoolMatrix, b: &BoolMatrix) -> BoolMatrix {
    BoolMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).any(|k| a.get(i, k) && b.get(k, j))
    })
}

/// Triple-loop ⊙ product: entry is 1 iff `a_ik ≤ b_kj` for every `k`.
pub fn naive_odot(a: &BoolMatrix, b: &BoolMatrix) -> BoolMatrix {
    BoolMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).all(|k| !a.get(i, k) || b.get(k, j))
    })
}

/// `Γ` and `Π` straight from the entry definitions.
pub fn naive_char(space: &CoveringSpace) -> (BoolMatrix, BoolMatrix) {
    let m = space.matrix_rep().unwrap();
    let mt = m.transpose();
    (naive_product(&m, &mt), naive_odot(&m, &mt))
}

/// A random valid covering with `n` objects `o0..` and `m` elements `E0..`.
pub fn random_space(rng: &mut impl Rng, n: usize, m: usize, p: f64) -> CoveringSpace {
    let objects: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();
    let mut members: Vec<BTreeSet<usize>> = (0..m).map(|_| (0..n).filter(|_| rng.gen_bool(p)).collect()).collect();
    for i in 0..n {
        if !members.iter().any(|s| s.contains(&i)) {
            members[rng.gen_range(0..m)].insert(i);
        }
    }
    for s in members.iter_mut() {
        if s.is_empty() {
            s.insert(rng.gen_range(0..n));
        }
    }
    let elements: Vec<(String, Vec<String>)> = members
        .iter()
        .enumerate()
        .map(|(j, s)| (format!("E{j}"), s.iter().map(|&i| objects[i].clone()).collect()))
        .collect();
    CoveringSpace::new(&objects, &elements).unwrap()
}

/// A random valid batch with exactly `t` new objects and `l` new elements.
/// Names are drawn from `tag` so several batches can be chained.
pub fn random_batch(rng: &mut impl Rng, space: &CoveringSpace, t: usize, l: usize, tag: &str) -> UpdateBatch {
    let new_objects: Vec<String> = (0..t).map(|i| format!("{tag}o{i}")).collect();
    let n = space.num_objects();
    let old_elements: Vec<String> = space.elements().iter().map(|e| e.name.clone()).collect();

    let mut ext: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); old_elements.len()];
    for set in ext.iter_mut() {
        if rng.gen_bool(0.3) {
            set.extend((0..t).filter(|_| rng.gen_bool(0.5)));
        }
    }
    // indices < n are old objects, n.. are new ones
    let mut fresh: Vec<BTreeSet<usize>> = (0..l)
        .map(|_| (0..n + t).filter(|_| rng.gen_bool(0.3)).collect())
        .collect();
    for k in 0..t {
        let covered = ext.iter().any(|s| s.contains(&k)) || fresh.iter().any(|s| s.contains(&(n + k)));
        if !covered {
            if l > 0 && (old_elements.is_empty() || rng.gen_bool(0.5)) {
                fresh[rng.gen_range(0..l)].insert(n + k);
            } else {
                ext[rng.gen_range(0..old_elements.len())].insert(k);
            }
        }
    }
    for s in fresh.iter_mut() {
        if s.is_empty() {
            s.insert(rng.gen_range(0..n + t));
        }
    }
    let name = |i: usize| {
        if i < n {
            space.objects()[i].clone()
        } else {
            new_objects[i - n].clone()
        }
    };
    let mut extensions: Vec<NamedSet> = ext
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(j, s)| NamedSet::new(old_elements[j].clone(), s.iter().map(|&k| new_objects[k].clone())))
        .collect();
    extensions.shuffle(rng);
    let new_elements = fresh
        .iter()
        .enumerate()
        .map(|(k, s)| NamedSet::new(format!("{tag}E{k}"), s.iter().map(|&i| name(i))))
        .collect();
    UpdateBatch {
        new_objects,
        extensions,
        new_elements,
    }
}

/// The enlarged covering written out directly from the batch contents.
pub fn merged_space(space: &CoveringSpace, batch: &UpdateBatch) -> CoveringSpace {
    let mut objects: Vec<String> = space.objects().to_vec();
    objects.extend(batch.new_objects.iter().cloned());
    let mut elements: Vec<(String, Vec<String>)> = space
        .elements()
        .iter()
        .map(|e| (e.name.clone(), space.names_of(e.members.iter().copied())))
        .collect();
    for ext in &batch.extensions {
        let slot = elements.iter_mut().find(|(n, _)| *n == ext.name).unwrap();
        slot.1.extend(ext.members.iter().cloned());
    }
    for e in &batch.new_elements {
        elements.push((e.name.clone(), e.members.to_vec()));
    }
    CoveringSpace::new(&objects, &elements).unwrap()
}
