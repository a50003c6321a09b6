//! Covering approximation spaces backed by bit-packed Boolean matrices.
//!
//! A [`CoveringSpace`] is turned into a [`CharState`] holding the membership
//! matrix `M` and the two characteristic matrices `Γ = M·Mᵀ` and `Π = M⊙Mᵀ`.
//! Lower and upper approximations of a query set are then single
//! matrix-vector products. When objects and elements are added, the
//! [`incremental`] module updates `Γ` and `Π` from small delta blocks
//! instead of recomputing them.

pub mod bench;
pub mod boolmat;
pub mod characteristic;
pub mod cli;
pub mod covering;
pub mod error;
pub mod incremental;
pub mod oracle;
pub mod persistence;

pub use boolmat::{BoolMatrix, OpCounter};
pub use characteristic::{ApproxResult, CharState, Operator};
pub use covering::{CoveringSpace, Element, QuerySet};
pub use error::{Error, FormatError, Result};
pub use incremental::{apply_update, UpdateBatch};
pub use persistence::LoadMode;
