//! Binary state files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "DCAS1"                         5-byte magic
//! n: u32, m: u32
//! n × (len: u32, UTF-8 bytes)     object names
//! m × (len: u32, UTF-8 bytes)     element names
//! M  n rows × ceil(m/64) u64 words
//! Γ  n rows × ceil(n/64) u64 words
//! Π  n rows × ceil(n/64) u64 words
//! ```
//!
//! Element member lists are recovered from the columns of `M`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::boolmat::{words_for, BoolMatrix};
use crate::characteristic::CharState;
use crate::covering::CoveringSpace;
use crate::error::{Error, FormatError, Result};

pub const MAGIC: &[u8; 5] = b"DCAS1";

/// How much checking [`load_state`] does beyond the structural checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Recompute `Γ` and `Π` from `M` and reject any disagreement.
    #[default]
    Verify,
    /// Skip the `O(n²m)` re-derivation.
    Trust,
}

fn write_u32(out: &mut impl Write, v: usize) -> io::Result<()> {
    let v = u32::try_from(v).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "count exceeds u32"))?;
    out.write_all(&v.to_le_bytes())
}

fn write_matrix(out: &mut impl Write, m: &BoolMatrix) -> io::Result<()> {
    let mut buf = Vec::with_capacity(m.words().len() * 8);
    for w in m.words() {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    out.write_all(&buf)
}

/// Writes `state`, returning the number of bytes written.
pub fn save_state(state: &CharState, sink: &mut impl Write) -> Result<u64> {
    let bytes = to_bytes(state)?;
    sink.write_all(&bytes)?;
    Ok(bytes.len() as u64)
}

pub fn to_bytes(state: &CharState) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    let space = state.space();
    write_u32(&mut out, space.num_objects())?;
    write_u32(&mut out, space.num_elements())?;
    let names = space.objects().iter().chain(space.elements().iter().map(|e| &e.name));
    for name in names {
        write_u32(&mut out, name.len())?;
        out.extend_from_slice(name.as_bytes());
    }
    write_matrix(&mut out, state.matrix())?;
    write_matrix(&mut out, state.gamma())?;
    write_matrix(&mut out, state.pi())?;
    Ok(out)
}

/// Writes to a temporary file next to `path` and renames it into place.
pub fn save_to_path(state: &CharState, path: &Path) -> Result<u64> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    let n = save_state(state, &mut tmp)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(n)
}

pub fn load_from_path(path: &Path, mode: LoadMode) -> Result<CharState> {
    from_bytes(&fs::read(path)?, mode)
}

pub fn load_state(source: &mut impl Read, mode: LoadMode) -> Result<CharState> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    from_bytes(&bytes, mode)
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.bytes.len() < n {
            return Err(FormatError::Truncated);
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<usize, FormatError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn name(&mut self) -> Result<String, FormatError> {
        let len = self.u32()?;
        let b = self.take(len)?;
        String::from_utf8(b.to_vec()).map_err(|_| FormatError::BadUtf8)
    }

    fn matrix(&mut self, name: &'static str, rows: usize, cols: usize) -> Result<BoolMatrix, FormatError> {
        let count = rows
            .checked_mul(words_for(cols))
            .and_then(|w| w.checked_mul(8))
            .ok_or(FormatError::Truncated)?;
        let raw = self.take(count)?;
        let words = raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        BoolMatrix::from_words(rows, cols, words).map_err(|row| FormatError::NonzeroPadding { matrix: name, row })
    }
}

pub fn from_bytes(bytes: &[u8], mode: LoadMode) -> Result<CharState> {
    let mut cur = Cursor { bytes };
    let magic = cur.take(MAGIC.len()).map_err(|_| FormatError::BadMagic)?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic.into());
    }
    let n = cur.u32()?;
    let m = cur.u32()?;
    // every name costs at least four bytes, so absurd counts fail fast
    if n.saturating_add(m).saturating_mul(4) > cur.bytes.len() {
        return Err(FormatError::Truncated.into());
    }
    let objects = (0..n).map(|_| cur.name()).collect::<Result<Vec<_>, _>>()?;
    let element_names = (0..m).map(|_| cur.name()).collect::<Result<Vec<_>, _>>()?;
    let matrix = cur.matrix("M", n, m)?;
    let gamma = cur.matrix("gamma", n, n)?;
    let pi = cur.matrix("pi", n, n)?;
    if !cur.bytes.is_empty() {
        return Err(FormatError::TrailingBytes.into());
    }

    let structure = |e: Error| FormatError::Structure(e.to_string());
    let mut space = CoveringSpace::with_objects(objects).map_err(structure)?;
    let element_rows = matrix.transpose();
    for (j, name) in element_names.into_iter().enumerate() {
        let members = element_rows.row_ones(j).collect();
        space.push_element(name, members).map_err(structure)?;
    }
    space.ensure_valid().map_err(structure)?;

    let state = CharState::from_parts(space, matrix, element_rows, gamma, pi);
    if mode == LoadMode::Verify {
        state.check_derivable().map_err(FormatError::from)?;
    }
    Ok(state)
}
