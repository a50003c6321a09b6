//! Type-1 and type-2 characteristic matrices and the matrix-form
//! approximation operators.
//!
//! For a covering with matrix representation `M`:
//!
//! * `Γ = M · Mᵀ`, so `Γ(i, j) = 1` iff some element contains both objects;
//! * `Π = M ⊙ Mᵀ`, so `Π(i, j) = 1` iff object `j` lies in the neighborhood of `i`.
//!
//! The second pair is `SH = Γ · χ_X`, `SL = Γ ⊙ χ_X`; the sixth pair is
//! `XH = Π · χ_X`, `XL = Π ⊙ χ_X`.

use std::fmt;
use std::str::FromStr;

use crate::boolmat::{BoolMatrix, OpCounter};
use crate::covering::{CoveringSpace, QuerySet};
use crate::error::{Error, FormatError, Result};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    /// Second upper approximation.
    SH,
    /// Second lower approximation.
    SL,
    /// Sixth upper approximation.
    XH,
    /// Sixth lower approximation.
    XL,
    /// Fifth upper approximation (set-theoretic path only).
    IH,
    /// Fifth lower approximation (set-theoretic path only).
    IL,
}

impl Operator {
    pub const ALL: [Operator; 6] = [
        Operator::SH,
        Operator::SL,
        Operator::XH,
        Operator::XL,
        Operator::IH,
        Operator::IL,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Operator::SH => "SH",
            Operator::SL => "SL",
            Operator::XH => "XH",
            Operator::XL => "XL",
            Operator::IH => "IH",
            Operator::IL => "IL",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Operator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Operator::ALL
            .into_iter()
            .find(|op| op.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown operator `{s}`"))
    }
}

/// An operator applied to a query set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxResult {
    pub op: Operator,
    pub query: QuerySet,
    /// `n × 1` membership vector.
    pub vector: BoolMatrix,
    /// Members in object order.
    pub members: Vec<String>,
}

impl ApproxResult {
    pub(crate) fn from_vector(space: &CoveringSpace, op: Operator, query: &QuerySet, vector: BoolMatrix) -> Self {
        let members = (0..vector.rows())
            .filter(|&i| vector.get(i, 0))
            .map(|i| space.objects()[i].clone())
            .collect();
        Self {
            op,
            query: query.clone(),
            vector,
            members,
        }
    }

    pub(crate) fn from_ids(space: &CoveringSpace, op: Operator, query: &QuerySet, ids: &[usize]) -> Self {
        let mut vector = BoolMatrix::zeros(space.num_objects(), 1);
        for &i in ids {
            vector.set(i, 0, true);
        }
        Self::from_vector(space, op, query, vector)
    }
}

impl fmt::Display for ApproxResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {{{}}}", self.op, self.members.join(","))
    }
}

/// A covering space with its matrix representation and both
/// characteristic matrices.
#[derive(Debug, Clone)]
pub struct CharState {
    space: CoveringSpace,
    matrix: BoolMatrix,
    /// `Mᵀ`, one bit row per element; derived, never persisted.
    element_rows: BoolMatrix,
    gamma: BoolMatrix,
    pi: BoolMatrix,
}

impl PartialEq for CharState {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.matrix == other.matrix && self.gamma == other.gamma && self.pi == other.pi
    }
}

impl Eq for CharState {}

/// Where a stored characteristic matrix first disagrees with `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub matrix: &'static str,
    pub row: usize,
    pub col: usize,
}

impl From<Mismatch> for FormatError {
    fn from(m: Mismatch) -> Self {
        FormatError::Derivation {
            matrix: m.matrix,
            row: m.row,
            col: m.col,
        }
    }
}

impl CharState {
    pub fn build(space: CoveringSpace) -> Result<Self> {
        Self::build_counted(space, &mut OpCounter::new(), &mut OpCounter::new())
    }

    /// Non-incremental construction; the counters receive the work spent on
    /// `Γ` and `Π` respectively.
    pub fn build_counted(space: CoveringSpace, gamma_ops: &mut OpCounter, pi_ops: &mut OpCounter) -> Result<Self> {
        let matrix = space.matrix_rep()?;
        let element_rows = space.element_rows();
        let gamma = matrix.bool_product_counted(&element_rows, gamma_ops)?;
        let pi = matrix.odot_product_counted(&element_rows, pi_ops)?;
        Ok(Self {
            space,
            matrix,
            element_rows,
            gamma,
            pi,
        })
    }

    /// Assembles a state from stored parts without re-deriving anything.
    /// The caller vouches that `matrix` is the representation of `space`.
    pub(crate) fn from_parts(
        space: CoveringSpace,
        matrix: BoolMatrix,
        element_rows: BoolMatrix,
        gamma: BoolMatrix,
        pi: BoolMatrix,
    ) -> Self {
        debug_assert_eq!(matrix.shape(), (space.num_objects(), space.num_elements()));
        debug_assert_eq!(element_rows.shape(), (space.num_elements(), space.num_objects()));
        Self {
            space,
            matrix,
            element_rows,
            gamma,
            pi,
        }
    }

    pub fn space(&self) -> &CoveringSpace {
        &self.space
    }

    /// The matrix representation `M`.
    pub fn matrix(&self) -> &BoolMatrix {
        &self.matrix
    }

    pub(crate) fn element_rows(&self) -> &BoolMatrix {
        &self.element_rows
    }

    /// The type-1 characteristic matrix `Γ`.
    pub fn gamma(&self) -> &BoolMatrix {
        &self.gamma
    }

    /// The type-2 characteristic matrix `Π`.
    pub fn pi(&self) -> &BoolMatrix {
        &self.pi
    }

    pub fn num_objects(&self) -> usize {
        self.space.num_objects()
    }

    pub fn num_elements(&self) -> usize {
        self.space.num_elements()
    }

    /// Recomputes `Γ` and `Π` from `M` and reports the first disagreement.
    pub fn check_derivable(&self) -> std::result::Result<(), Mismatch> {
        let gamma = self.matrix.bool_product(&self.element_rows).expect("conformal");
        let pi = self.matrix.odot_product(&self.element_rows).expect("conformal");
        for (name, stored, derived) in [("gamma", &self.gamma, gamma), ("pi", &self.pi, pi)] {
            let diff = if stored.shape() == derived.shape() {
                stored.diff(&derived).expect("same shape")
            } else {
                vec![(0, 0)]
            };
            if let Some(&(row, col)) = diff.first() {
                return Err(Mismatch { matrix: name, row, col });
            }
        }
        Ok(())
    }

    /// `(SH(X), SL(X))`.
    pub fn second_approx(&self, query: &QuerySet) -> Result<(ApproxResult, ApproxResult)> {
        let x = self.space.char_vector(query)?;
        let (upper, lower) = self.second_approx_vector(&x, &mut OpCounter::new())?;
        Ok((
            ApproxResult::from_vector(&self.space, Operator::SH, query, upper),
            ApproxResult::from_vector(&self.space, Operator::SL, query, lower),
        ))
    }

    /// `(XH(X), XL(X))`.
    pub fn sixth_approx(&self, query: &QuerySet) -> Result<(ApproxResult, ApproxResult)> {
        let x = self.space.char_vector(query)?;
        let (upper, lower) = self.sixth_approx_vector(&x, &mut OpCounter::new())?;
        Ok((
            ApproxResult::from_vector(&self.space, Operator::XH, query, upper),
            ApproxResult::from_vector(&self.space, Operator::XL, query, lower),
        ))
    }

    pub fn second_approx_vector(&self, x: &BoolMatrix, ops: &mut OpCounter) -> Result<(BoolMatrix, BoolMatrix)> {
        Ok((
            self.gamma.bool_product_counted(x, ops)?,
            self.gamma.odot_product_counted(x, ops)?,
        ))
    }

    pub fn sixth_approx_vector(&self, x: &BoolMatrix, ops: &mut OpCounter) -> Result<(BoolMatrix, BoolMatrix)> {
        Ok((
            self.pi.bool_product_counted(x, ops)?,
            self.pi.odot_product_counted(x, ops)?,
        ))
    }

    /// One operator. `IH`/`IL` have no matrix form and go through the
    /// set-theoretic definitions.
    pub fn approx(&self, op: Operator, query: &QuerySet) -> Result<ApproxResult> {
        let pick = |(upper, lower): (ApproxResult, ApproxResult), want_upper: bool| {
            if want_upper {
                upper
            } else {
                lower
            }
        };
        Ok(match op {
            Operator::SH | Operator::SL => pick(self.second_approx(query)?, op == Operator::SH),
            Operator::XH | Operator::XL => pick(self.sixth_approx(query)?, op == Operator::XH),
            Operator::IH | Operator::IL => pick(oracle::oracle_fifth(&self.space, query)?, op == Operator::IH),
        })
    }
}

/// Density of ones, for reporting.
pub fn density(m: &BoolMatrix) -> f64 {
    let cells = m.rows() * m.cols();
    if cells == 0 {
        0.0
    } else {
        m.count_ones() as f64 / cells as f64
    }
}

impl From<Mismatch> for Error {
    fn from(m: Mismatch) -> Self {
        Error::Format(m.into())
    }
}
