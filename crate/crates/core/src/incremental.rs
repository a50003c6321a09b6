//! Immigration updates: new objects, extensions of existing elements by new
//! objects, and new elements.
//!
//! With `n` old objects, `m` old elements, `t` new objects and `l` new
//! elements, the enlarged matrix representation `M⁺` keeps the old `n × m`
//! block unchanged. The characteristic matrices of the enlarged covering are
//!
//! ```text
//! Γ⁺ = [[Γ, 0], [0, 0]] ∨ [[Δ₁, Δ₂ᵀ], [Δ₂, Δ₃]]
//! Π⁺ = [[Π, 1], [1, 1]] ∧ [[Δ₁, Δ₃], [Δ₂, Δ₄]]
//! ```
//!
//! where every Δ-block is a product of slices of `M⁺`. Only the blocks are
//! computed; the old `n × n` entries are reused from the stored matrix.
//! [`PreparedUpdate::finish_pi`] folds `Δ₁`, `Δ₃` and the meet into one
//! pass over the old rows and is what [`apply_update`] uses.
//!
//! Batch text format:
//!
//! ```text
//! add-objects: x5 x6
//! extend C1: x5
//! new C4: x3 x5 x6
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::boolmat::{BoolMatrix, OpCounter};
use crate::characteristic::CharState;
use crate::covering::{check_name, strip_comment, CoveringSpace};
use crate::error::{Error, Result, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedSet {
    pub name: String,
    pub members: Vec<String>,
}

impl NamedSet {
    pub fn new<S: Into<String>>(name: impl Into<String>, members: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            members: members.into_iter().map(Into::into).collect(),
        }
    }
}

/// New objects, extensions `ΔC_i` of existing elements, and new elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateBatch {
    pub new_objects: Vec<String>,
    pub extensions: Vec<NamedSet>,
    pub new_elements: Vec<NamedSet>,
}

impl UpdateBatch {
    pub fn is_empty(&self) -> bool {
        self.new_objects.is_empty() && self.extensions.is_empty() && self.new_elements.is_empty()
    }

    /// Parses the batch text format. Repeated `extend` lines for one element
    /// are merged; errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut batch = UpdateBatch::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "expected `add-objects:`, `extend NAME:` or `new NAME:`"))?;
            let members: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            let mut words = head.split_whitespace();
            let keyword = words.next().unwrap_or("");
            let name = words.next();
            if words.next().is_some() {
                return Err(Error::parse(line_no, "too many tokens before `:`"));
            }
            match (keyword, name) {
                ("add-objects", None) => batch.new_objects.extend(members),
                ("extend", Some(name)) => match batch.extensions.iter_mut().find(|e| e.name == name) {
                    Some(ext) => ext.members.extend(members),
                    None => batch.extensions.push(NamedSet::new(name, members)),
                },
                ("new", Some(name)) => batch.new_elements.push(NamedSet::new(name, members)),
                ("extend" | "new", None) => {
                    return Err(Error::parse(line_no, format!("`{keyword}` needs an element name")));
                }
                _ => return Err(Error::parse(line_no, format!("unknown statement `{head}`"))),
            }
        }
        Ok(batch)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.new_objects.is_empty() {
            out.push_str(&format!("add-objects: {}\n", self.new_objects.join(" ")));
        }
        for e in &self.extensions {
            out.push_str(&format!("extend {}: {}\n", e.name, e.members.join(" ")));
        }
        for e in &self.new_elements {
            out.push_str(&format!("new {}: {}\n", e.name, e.members.join(" ")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BatchViolation {
    InvalidName(String),
    ObjectCollision(String),
    ElementCollision(String),
    UnknownElement(String),
    UnknownObject {
        context: String,
        object: String,
    },
    EmptyExtension(String),
    ExtensionNotNew {
        element: String,
        object: String,
    },
    EmptyNewElement(String),
    UncoveredNewObject(String),
    /// Strict mode: fewer than two new objects.
    TooFewNewObjects(usize),
    /// Strict mode: fewer than two new elements.
    TooFewNewElements(usize),
    /// Strict mode: a new object lies in no new element.
    NotInNewElement(String),
}

impl BatchViolation {
    fn is_collision(&self) -> bool {
        matches!(
            self,
            BatchViolation::ObjectCollision(_) | BatchViolation::ElementCollision(_)
        )
    }
}

impl fmt::Display for BatchViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use BatchViolation::*;
        match self {
            InvalidName(n) => write!(f, "invalid name `{n}`"),
            ObjectCollision(n) => write!(f, "object name `{n}` collides with an existing object"),
            ElementCollision(n) => write!(f, "element name `{n}` collides with an existing element"),
            UnknownElement(n) => write!(f, "extension of unknown element `{n}`"),
            UnknownObject { context, object } => write!(f, "{context}: unknown object `{object}`"),
            EmptyExtension(n) => write!(f, "extension of {n} is empty"),
            ExtensionNotNew { element, object } => {
                write!(
                    f,
                    "extension must contain only new objects: {element} extended by old object {object}"
                )
            }
            EmptyNewElement(n) => write!(f, "new element {n} is empty"),
            UncoveredNewObject(n) => write!(f, "uncovered new object {n}"),
            TooFewNewObjects(t) => write!(f, "strict mode needs at least 2 new objects, got {t}"),
            TooFewNewElements(l) => write!(f, "strict mode needs at least 2 new elements, got {l}"),
            NotInNewElement(n) => write!(f, "strict mode: new object {n} is in no new element"),
        }
    }
}

/// A batch with every name turned into an index of the enlarged space.
#[derive(Debug, Clone, Default)]
struct ResolvedBatch {
    /// `(old element index, new object indices)`, indices are global.
    extensions: Vec<(usize, Vec<usize>)>,
    /// Member lists of the new elements, global object indices.
    new_elements: Vec<Vec<usize>>,
}

fn resolve(space: &CoveringSpace, batch: &UpdateBatch, strict: bool) -> (ResolvedBatch, Vec<BatchViolation>) {
    use BatchViolation as V;
    let n = space.num_objects();
    let mut violations = Vec::new();

    let mut new_ids = BTreeMap::new();
    for name in &batch.new_objects {
        if check_name(name).is_err() {
            violations.push(V::InvalidName(name.clone()));
        } else if space.has_object(name) || new_ids.contains_key(name.as_str()) {
            violations.push(V::ObjectCollision(name.clone()));
        } else {
            new_ids.insert(name.as_str(), n + new_ids.len());
        }
    }
    let t = batch.new_objects.len();
    let mut covered = vec![false; t];
    let mut in_new_element = vec![false; t];
    let mut resolved = ResolvedBatch::default();

    for ext in &batch.extensions {
        let Ok(element) = space.element_id(&ext.name) else {
            violations.push(V::UnknownElement(ext.name.clone()));
            continue;
        };
        if ext.members.is_empty() {
            violations.push(V::EmptyExtension(ext.name.clone()));
        }
        let mut ids = Vec::new();
        for obj in &ext.members {
            if let Some(&id) = new_ids.get(obj.as_str()) {
                ids.push(id);
                covered[id - n] = true;
            } else if space.has_object(obj) {
                violations.push(V::ExtensionNotNew {
                    element: ext.name.clone(),
                    object: obj.clone(),
                });
            } else {
                violations.push(V::UnknownObject {
                    context: format!("extend {}", ext.name),
                    object: obj.clone(),
                });
            }
        }
        ids.sort_unstable();
        ids.dedup();
        resolved.extensions.push((element, ids));
    }

    let mut seen_elements = HashSet::new();
    for el in &batch.new_elements {
        if check_name(&el.name).is_err() {
            violations.push(V::InvalidName(el.name.clone()));
        } else if space.has_element(&el.name) || !seen_elements.insert(el.name.as_str()) {
            violations.push(V::ElementCollision(el.name.clone()));
        }
        if el.members.is_empty() {
            violations.push(V::EmptyNewElement(el.name.clone()));
        }
        let mut ids = Vec::new();
        for obj in &el.members {
            if let Some(&id) = new_ids.get(obj.as_str()) {
                ids.push(id);
                covered[id - n] = true;
                in_new_element[id - n] = true;
            } else if let Ok(id) = space.object_id(obj) {
                ids.push(id);
            } else {
                violations.push(V::UnknownObject {
                    context: format!("new {}", el.name),
                    object: obj.clone(),
                });
            }
        }
        ids.sort_unstable();
        ids.dedup();
        resolved.new_elements.push(ids);
    }

    // positions in `covered` line up with new_objects only when there are no
    // collisions, which are already reported above
    if new_ids.len() == t {
        for (i, name) in batch.new_objects.iter().enumerate() {
            if !covered[i] {
                violations.push(V::UncoveredNewObject(name.clone()));
            } else if strict && !in_new_element[i] {
                violations.push(V::NotInNewElement(name.clone()));
            }
        }
    }
    if strict {
        if t < 2 {
            violations.push(V::TooFewNewObjects(t));
        }
        if batch.new_elements.len() < 2 {
            violations.push(V::TooFewNewElements(batch.new_elements.len()));
        }
    }
    (resolved, violations)
}

/// Checks a batch against a state, accepting new objects covered either by a
/// new element or by an extension, and any `t, l ≥ 0`.
pub fn validate_batch(state: &CharState, batch: &UpdateBatch) -> ValidationReport<BatchViolation> {
    ValidationReport::new(resolve(state.space(), batch, false).1)
}

/// Like [`validate_batch`], additionally requiring `t ≥ 2`, `l ≥ 2` and every
/// new object to lie in some new element.
pub fn validate_batch_strict(state: &CharState, batch: &UpdateBatch) -> ValidationReport<BatchViolation> {
    ValidationReport::new(resolve(state.space(), batch, true).1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaDeltas {
    /// `n × n`: new columns restricted to old rows, times its transpose.
    pub delta1: BoolMatrix,
    /// `t × n`: new rows times old rows transposed.
    pub delta2: BoolMatrix,
    /// `t × t`: new rows times new rows transposed.
    pub delta3: BoolMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiDeltas {
    /// `n × n`
    pub delta1: BoolMatrix,
    /// `t × n`
    pub delta2: BoolMatrix,
    /// `n × t`; not the transpose of `delta2` in general.
    pub delta3: BoolMatrix,
    /// `t × t`
    pub delta4: BoolMatrix,
}

/// A validated batch with the enlarged `M⁺` built, ready for Δ-block
/// computation.
#[derive(Debug, Clone)]
pub struct PreparedUpdate<'a> {
    state: &'a CharState,
    batch: &'a UpdateBatch,
    resolved: ResolvedBatch,
    t: usize,
    l: usize,
    matrix: BoolMatrix,
    element_rows: BoolMatrix,
}

impl<'a> PreparedUpdate<'a> {
    pub fn new(state: &'a CharState, batch: &'a UpdateBatch) -> Result<Self> {
        let (resolved, violations) = resolve(state.space(), batch, false);
        if let Some(v) = violations.iter().find(|v| v.is_collision()) {
            let name = match v {
                BatchViolation::ObjectCollision(n) | BatchViolation::ElementCollision(n) => n.clone(),
                _ => unreachable!(),
            };
            return Err(Error::NameCollision(name));
        }
        if !violations.is_empty() {
            return Err(Error::InvalidBatch(ValidationReport::new(violations)));
        }
        let (n, m) = (state.num_objects(), state.num_elements());
        let (t, l) = (batch.new_objects.len(), batch.new_elements.len());
        let mut matrix = state.matrix().grown(n + t, m + l);
        let mut element_rows = state.element_rows().grown(m + l, n + t);
        for (j, ids) in &resolved.extensions {
            for &i in ids {
                matrix.set(i, *j, true);
                element_rows.set(*j, i, true);
            }
        }
        for (k, ids) in resolved.new_elements.iter().enumerate() {
            for &i in ids {
                matrix.set(i, m + k, true);
                element_rows.set(m + k, i, true);
            }
        }
        Ok(Self {
            state,
            batch,
            resolved,
            t,
            l,
            matrix,
            element_rows,
        })
    }

    fn n(&self) -> usize {
        self.state.num_objects()
    }

    fn m(&self) -> usize {
        self.state.num_elements()
    }

    pub fn new_objects(&self) -> usize {
        self.t
    }

    pub fn new_elements(&self) -> usize {
        self.l
    }

    /// `M⁺`, `(n + t) × (m + l)`.
    pub fn matrix(&self) -> &BoolMatrix {
        &self.matrix
    }

    /// Old rows restricted to the new columns, `n × l`, and its transpose.
    fn new_column_slices(&self) -> (BoolMatrix, BoolMatrix) {
        let (n, m) = (self.n(), self.m());
        (
            self.matrix.submatrix(0..n, m..m + self.l),
            self.element_rows.submatrix(m..m + self.l, 0..n),
        )
    }

    fn new_rows(&self) -> BoolMatrix {
        self.matrix.submatrix(self.n()..self.n() + self.t, 0..self.m() + self.l)
    }

    /// Columns of `M⁺` restricted to new objects, as rows: `(m + l) × t`.
    fn new_rows_t(&self) -> BoolMatrix {
        let n = self.n();
        self.element_rows.submatrix(0..self.m() + self.l, n..n + self.t)
    }

    /// Splits a `t × (n + t)` strip into its old and new column blocks.
    fn split_strip(&self, strip: &BoolMatrix) -> (BoolMatrix, BoolMatrix) {
        let (n, t) = (self.n(), self.t);
        (strip.submatrix(0..t, 0..n), strip.submatrix(0..t, n..n + t))
    }

    pub fn gamma_deltas(&self, ops: &mut OpCounter) -> GammaDeltas {
        let (p, p_t) = self.new_column_slices();
        let delta1 = p.bool_product_counted(&p_t, ops).expect("conformal");
        // Δ₂ and Δ₃ share their left factor, so one pass over the new rows yields both
        let strip = self
            .new_rows()
            .bool_product_counted(&self.element_rows, ops)
            .expect("conformal");
        let (delta2, delta3) = self.split_strip(&strip);
        GammaDeltas { delta1, delta2, delta3 }
    }

    pub fn pi_deltas(&self, ops: &mut OpCounter) -> PiDeltas {
        let (p, p_t) = self.new_column_slices();
        let delta1 = p.odot_product_counted(&p_t, ops).expect("conformal");
        let strip = self
            .new_rows()
            .odot_product_counted(&self.element_rows, ops)
            .expect("conformal");
        let (delta2, delta4) = self.split_strip(&strip);
        let old_rows = self.matrix.submatrix(0..self.n(), 0..self.m() + self.l);
        let delta3 = old_rows
            .odot_product_counted(&self.new_rows_t(), ops)
            .expect("conformal");
        PiDeltas {
            delta1,
            delta2,
            delta3,
            delta4,
        }
    }

    /// The bottom strip `[Δ₂, Δ₄]` of `Π⁺`, `t × (n + t)`.
    pub fn pi_strip(&self, ops: &mut OpCounter) -> BoolMatrix {
        self.new_rows()
            .odot_product_counted(&self.element_rows, ops)
            .expect("conformal")
    }

    /// `Π⁺` from `Π` and the strip, without materializing `Δ₁` or `Δ₃`.
    ///
    /// Old row `i` starts as `[Π_i, 1]`. ANDing the rows of `M⁺ᵀ` for its new
    /// columns leaves `Π_i ∧ Δ₁_i` on the left and part of `Δ₃_i` on the
    /// right; its old columns then finish `Δ₃_i`, touching only the words
    /// that hold the right block. No row costs more than rebuilding it.
    pub fn finish_pi(&self, strip: &BoolMatrix, ops: &mut OpCounter) -> BoolMatrix {
        let (n, m, t) = (self.n(), self.m(), self.t);
        assert_eq!(strip.shape(), (t, n + t));
        let mut out = self.state.pi().grown(n + t, n + t);
        out.paste(&BoolMatrix::ones(n, t), 0, n);
        out.paste(strip, n, 0);
        if n == 0 {
            return out;
        }
        // words overlapping columns n..n+t, and the old-column bits within them
        let (lo, hi) = (n / 64, (n + t).div_ceil(64));
        let left: Vec<u64> = (lo..hi)
            .map(|w| {
                let start = w * 64;
                if start + 64 <= n {
                    !0
                } else if start >= n {
                    0
                } else {
                    (1u64 << (n - start)) - 1
                }
            })
            .collect();
        let stride = out.stride();
        for i in 0..n {
            let acc = out.row_words_mut(i);
            for k in self.matrix.row_ones(i).filter(|&k| k >= m) {
                for (a, b) in acc.iter_mut().zip(self.element_rows.row_words(k)) {
                    *a &= *b;
                }
                ops.add(stride);
            }
            let corner_live = |acc: &[u64]| (lo..hi).any(|w| acc[w] & !left[w - lo] != 0);
            if t == 0 || !corner_live(acc) {
                continue;
            }
            for j in self.matrix.row_ones(i).take_while(|&j| j < m) {
                let col = self.element_rows.row_words(j);
                for w in lo..hi {
                    acc[w] &= col[w] | left[w - lo];
                }
                ops.add(hi - lo);
                if !corner_live(acc) {
                    break;
                }
            }
        }
        out
    }

    /// The enlarged covering space.
    pub fn merged_space(&self) -> CoveringSpace {
        let mut space = self.state.space().clone();
        for name in &self.batch.new_objects {
            space.push_object(name.clone()).expect("validated");
        }
        for (j, ids) in &self.resolved.extensions {
            space.extend_element(*j, ids);
        }
        for (el, ids) in self.batch.new_elements.iter().zip(&self.resolved.new_elements) {
            space.push_element(el.name.clone(), ids.clone()).expect("validated");
        }
        space
    }

    /// Finishes the update from already-assembled matrices.
    pub fn into_state(self, gamma: BoolMatrix, pi: BoolMatrix) -> CharState {
        let space = self.merged_space();
        CharState::from_parts(space, self.matrix, self.element_rows, gamma, pi)
    }
}

/// `M⁺` for a valid batch: old rows and columns first, then the new ones.
pub fn extend_matrix_rep(state: &CharState, batch: &UpdateBatch) -> Result<BoolMatrix> {
    Ok(PreparedUpdate::new(state, batch)?.matrix)
}

pub fn gamma_deltas(state: &CharState, batch: &UpdateBatch) -> Result<GammaDeltas> {
    Ok(PreparedUpdate::new(state, batch)?.gamma_deltas(&mut OpCounter::new()))
}

pub fn pi_deltas(state: &CharState, batch: &UpdateBatch) -> Result<PiDeltas> {
    Ok(PreparedUpdate::new(state, batch)?.pi_deltas(&mut OpCounter::new()))
}

fn expect_shape(op: &'static str, got: &BoolMatrix, want: (usize, usize)) -> Result<()> {
    if got.shape() != want {
        return Err(Error::Dimension {
            op,
            left: got.shape(),
            right: want,
        });
    }
    Ok(())
}

/// `[[Γ, 0], [0, 0]] ∨ [[Δ₁, Δ₂ᵀ], [Δ₂, Δ₃]]`.
pub fn update_gamma(gamma: &BoolMatrix, deltas: &GammaDeltas) -> Result<BoolMatrix> {
    update_gamma_counted(gamma, deltas, &mut OpCounter::new())
}

pub fn update_gamma_counted(gamma: &BoolMatrix, deltas: &GammaDeltas, ops: &mut OpCounter) -> Result<BoolMatrix> {
    let n = gamma.rows();
    let t = deltas.delta3.rows();
    expect_shape("update_gamma", gamma, (n, n))?;
    expect_shape("update_gamma", &deltas.delta1, (n, n))?;
    expect_shape("update_gamma", &deltas.delta2, (t, n))?;
    expect_shape("update_gamma", &deltas.delta3, (t, t))?;
    let mut out = gamma.grown(n + t, n + t);
    out.join_top_left(&deltas.delta1, ops);
    // the remaining blocks are joined with zero padding
    out.paste(&deltas.delta2.transpose(), 0, n);
    out.paste(&deltas.delta2, n, 0);
    out.paste(&deltas.delta3, n, n);
    Ok(out)
}

/// `[[Π, 1], [1, 1]] ∧ [[Δ₁, Δ₃], [Δ₂, Δ₄]]`.
pub fn update_pi(pi: &BoolMatrix, deltas: &PiDeltas) -> Result<BoolMatrix> {
    update_pi_counted(pi, deltas, &mut OpCounter::new())
}

pub fn update_pi_counted(pi: &BoolMatrix, deltas: &PiDeltas, ops: &mut OpCounter) -> Result<BoolMatrix> {
    let n = pi.rows();
    let t = deltas.delta4.rows();
    expect_shape("update_pi", pi, (n, n))?;
    expect_shape("update_pi", &deltas.delta1, (n, n))?;
    expect_shape("update_pi", &deltas.delta2, (t, n))?;
    expect_shape("update_pi", &deltas.delta3, (n, t))?;
    expect_shape("update_pi", &deltas.delta4, (t, t))?;
    let mut out = pi.grown(n + t, n + t);
    out.meet_top_left(&deltas.delta1, ops);
    // meeting with the all-ones padding is the block itself
    out.paste(&deltas.delta3, 0, n);
    out.paste(&deltas.delta2, n, 0);
    out.paste(&deltas.delta4, n, n);
    Ok(out)
}

/// Word-operation counts of one incremental update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateStats {
    pub new_objects: usize,
    pub new_elements: usize,
    pub gamma_delta_ops: u64,
    pub gamma_join_ops: u64,
    pub pi_delta_ops: u64,
    pub pi_meet_ops: u64,
}

/// Applies a batch, returning the enlarged state. The input is untouched.
pub fn apply_update(state: &CharState, batch: &UpdateBatch) -> Result<CharState> {
    Ok(apply_update_counted(state, batch)?.0)
}

pub fn apply_update_counted(state: &CharState, batch: &UpdateBatch) -> Result<(CharState, UpdateStats)> {
    let prepared = PreparedUpdate::new(state, batch)?;
    let mut stats = UpdateStats {
        new_objects: prepared.t,
        new_elements: prepared.l,
        ..Default::default()
    };
    let mut ops = OpCounter::new();
    let gd = prepared.gamma_deltas(&mut ops);
    stats.gamma_delta_ops = ops.get();
    let mut ops = OpCounter::new();
    let gamma = update_gamma_counted(state.gamma(), &gd, &mut ops)?;
    stats.gamma_join_ops = ops.get();
    let mut ops = OpCounter::new();
    let strip = prepared.pi_strip(&mut ops);
    stats.pi_delta_ops = ops.get();
    let mut ops = OpCounter::new();
    let pi = prepared.finish_pi(&strip, &mut ops);
    stats.pi_meet_ops = ops.get();
    Ok((prepared.into_state(gamma, pi), stats))
}

/// One batch equivalent to applying `first` and then `second` to `space`.
pub fn merge_batches(space: &CoveringSpace, first: &UpdateBatch, second: &UpdateBatch) -> UpdateBatch {
    let mut merged = first.clone();
    merged.new_objects.extend(second.new_objects.iter().cloned());
    for ext in &second.extensions {
        if space.has_element(&ext.name) {
            match merged.extensions.iter_mut().find(|e| e.name == ext.name) {
                Some(e) => e.members.extend(ext.members.iter().cloned()),
                None => merged.extensions.push(ext.clone()),
            }
        } else if let Some(el) = merged.new_elements.iter_mut().find(|e| e.name == ext.name) {
            el.members.extend(ext.members.iter().cloned());
        } else {
            // unknown element: keep it so validation reports it
            merged.extensions.push(ext.clone());
        }
    }
    merged.new_elements.extend(second.new_elements.iter().cloned());
    merged
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> CharState {
        let space = CoveringSpace::new(
            &["x1", "x2", "x3", "x4"],
            &[
                ("C1", vec!["x1", "x4"]),
                ("C2", vec!["x1", "x2", "x4"]),
                ("C3", vec!["x3", "x4"]),
            ],
        )
        .unwrap();
        CharState::build(space).unwrap()
    }

    const BATCH: &str = "add-objects: x5 x6\nextend C1: x5\nextend C2: x5\nnew C4: x3 x5 x6\nnew C5: x1 x6\n";

    fn m(s: &str) -> BoolMatrix {
        s.parse().unwrap()
    }

    #[test]
    fn fused_pi_matches_blocks() {
        let (s, b) = (base(), UpdateBatch::parse(BATCH).unwrap());
        let prepared = PreparedUpdate::new(&s, &b).unwrap();
        let mut ops = OpCounter::new();
        let strip = prepared.pi_strip(&mut ops);
        assert_eq!(strip, m("000010 000001"));
        let fused = prepared.finish_pi(&strip, &mut ops);
        let blocks = update_pi(s.pi(), &pi_deltas(&s, &b).unwrap()).unwrap();
        assert_eq!(fused, blocks);
        assert_eq!(fused, m("100000 110110 001000 000100 000010 000001"));
    }

    #[test]
    fn worked_batch_validates() {
        let b = UpdateBatch::parse(BATCH).unwrap();
        assert!(validate_batch(&base(), &b).is_ok());
        assert!(validate_batch_strict(&base(), &b).is_ok());
    }

    #[test]
    fn extension_with_old_object() {
        let b = UpdateBatch::parse("add-objects: x5\nextend C1: x5 x2\n").unwrap();
        let r = validate_batch(&base(), &b);
        assert_eq!(
            r.violations,
            vec![BatchViolation::ExtensionNotNew {
                element: "C1".into(),
                object: "x2".into()
            }]
        );
        assert!(r.to_string().contains("extension must contain only new objects"));
    }

    #[test]
    fn uncovered_new_object() {
        let b = UpdateBatch::parse("add-objects: x5 x6\nnew C4: x5\n").unwrap();
        let r = validate_batch(&base(), &b);
        assert_eq!(r.violations, vec![BatchViolation::UncoveredNewObject("x6".into())]);
        assert_eq!(r.to_string(), "uncovered new object x6");
    }

    #[test]
    fn strict_mode_bounds() {
        let b = UpdateBatch::parse("add-objects: x5\nextend C1: x5\n").unwrap();
        assert!(validate_batch(&base(), &b).is_ok());
        let r = validate_batch_strict(&base(), &b);
        assert_eq!(
            r.violations,
            vec![
                BatchViolation::NotInNewElement("x5".into()),
                BatchViolation::TooFewNewObjects(1),
                BatchViolation::TooFewNewElements(0)
            ]
        );
    }

    #[test]
    fn collisions_become_errors() {
        let b = UpdateBatch::parse("add-objects: x1\nnew C9: x1\n").unwrap();
        assert!(matches!(apply_update(&base(), &b), Err(Error::NameCollision(n)) if n == "x1"));
        let b = UpdateBatch::parse("new C1: x1\n").unwrap();
        assert!(matches!(apply_update(&base(), &b), Err(Error::NameCollision(n)) if n == "C1"));
        let b = UpdateBatch::parse("extend C7: x1\n").unwrap();
        assert!(matches!(apply_update(&base(), &b), Err(Error::InvalidBatch(_))));
    }

    #[test]
    fn extended_matrix_of_worked_batch() {
        let b = UpdateBatch::parse(BATCH).unwrap();
        let mp = extend_matrix_rep(&base(), &b).unwrap();
        assert_eq!(mp, m("11001 01000 00110 11100 11010 00011"));
        let empty = extend_matrix_rep(&base(), &UpdateBatch::default()).unwrap();
        assert_eq!(&empty, base().matrix());
        let all = UpdateBatch::parse("new U: x1 x2 x3 x4\n").unwrap();
        let mp = extend_matrix_rep(&base(), &all).unwrap();
        assert_eq!(mp.submatrix(0..4, 3..4), BoolMatrix::ones(4, 1));
    }

    #[test]
    fn gamma_blocks_of_worked_batch() {
        let b = UpdateBatch::parse(BATCH).unwrap();
        let d = gamma_deltas(&base(), &b).unwrap();
        assert_eq!(d.delta1, m("1000 0000 0010 0000"));
        // x6 = (0,0,0,1,1): shares C4 with x3 and C5 with x1
        assert_eq!(d.delta2, m("1111 1010"));
        assert_eq!(d.delta3, m("11 11"));
        let g = update_gamma(base().gamma(), &d).unwrap();
        assert_eq!(g, m("110111 110110 001111 111110 111111 101011"));
    }

    #[test]
    fn pi_blocks_of_worked_batch() {
        let b = UpdateBatch::parse(BATCH).unwrap();
        let d = pi_deltas(&base(), &b).unwrap();
        assert_eq!(d.delta1, m("1000 1111 0010 1111"));
        assert_eq!(d.delta2, BoolMatrix::zeros(2, 4));
        assert_eq!(d.delta3, m("00 10 00 00"));
        assert_eq!(d.delta4, BoolMatrix::identity(2));
        let p = update_pi(base().pi(), &d).unwrap();
        assert_eq!(p, m("100000 110110 001000 000100 000010 000001"));
    }

    #[test]
    fn empty_batch_is_identity() {
        let s = base();
        let b = UpdateBatch::default();
        let d = gamma_deltas(&s, &b).unwrap();
        assert!(d.delta1.is_zero());
        assert_eq!(d.delta2.shape(), (0, 4));
        assert_eq!(d.delta3.shape(), (0, 0));
        let pd = pi_deltas(&s, &b).unwrap();
        assert_eq!(pd.delta1, BoolMatrix::ones(4, 4));
        assert_eq!(apply_update(&s, &b).unwrap(), s);
    }

    #[test]
    fn shape_mismatch_in_update() {
        let d = GammaDeltas {
            delta1: BoolMatrix::zeros(3, 3),
            delta2: BoolMatrix::zeros(1, 4),
            delta3: BoolMatrix::zeros(1, 1),
        };
        assert!(matches!(update_gamma(base().gamma(), &d), Err(Error::Dimension { .. })));
    }

    #[test]
    fn batch_text_round_trip() {
        let b = UpdateBatch::parse(BATCH).unwrap();
        assert_eq!(b.extensions.len(), 2);
        assert_eq!(UpdateBatch::parse(&b.to_text()).unwrap(), b);
        assert!(matches!(
            UpdateBatch::parse("frob: x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            UpdateBatch::parse("\nnew: x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn merged_batch_folds_extensions_of_new_elements() {
        let s = base();
        let b1 = UpdateBatch::parse("add-objects: x5\nnew C4: x5 x1\n").unwrap();
        let b2 = UpdateBatch::parse("add-objects: x6\nextend C4: x6\nextend C3: x6\n").unwrap();
        let merged = merge_batches(s.space(), &b1, &b2);
        let once = apply_update(&s, &merged).unwrap();
        let twice = apply_update(&apply_update(&s, &b1).unwrap(), &b2).unwrap();
        assert_eq!(once, twice);
    }
}
