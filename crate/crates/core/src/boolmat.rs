//! Bit-packed Boolean matrices.
//!
//! Rows are stored row-major, each padded to a whole number of 64-bit
//! words. Padding bits past the last column are always zero, so equality,
//! hashing and serialization can work on the raw words.
//!
//! Both products use the same row-merge kernel: output row `i` is obtained
//! by merging the rows of the right operand selected by the set bits of row
//! `i` of the left operand. The Boolean product merges with OR starting from
//! zero; the `⊙` product merges with AND starting from all ones, because
//! `c_ij = ⋀_k (a_ik → b_kj) = ⋀_{k : a_ik = 1} b_kj`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the last word of a row with `cols` columns.
#[inline]
fn tail_mask(cols: usize) -> u64 {
    match cols % WORD_BITS {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

/// Counts word-wide merge operations (AND / OR of one 64-bit word into an
/// accumulator) performed by the product kernels and the block join/meet.
///
/// Scanning for set bits and moving data between blocks is not counted.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct OpCounter(u64);

impl OpCounter {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn get(&self) -> u64 {
        self.0
    }

    #[inline]
    pub(crate) fn add(&mut self, ops: usize) {
        self.0 += ops as u64;
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BoolMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            fill_ones(m.row_words_mut(r), cols);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values.
    ///
    /// # Panics
    ///
    /// Panics if the rows are ragged or contain values other than 0 and 1.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged row {i}");
            for (j, &v) in row.iter().enumerate() {
                assert!(v <= 1, "entry ({i}, {j}) is {v}, expected 0 or 1");
                if v == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Wraps raw row-major words. Fails if the word count is wrong or any
    /// padding bit is set; the error carries the offending row.
    pub fn from_words(rows: usize, cols: usize, data: Vec<u64>) -> std::result::Result<Self, usize> {
        let stride = words_for(cols);
        if data.len() != rows * stride {
            return Err(rows);
        }
        let m = Self {
            rows,
            cols,
            stride,
            data,
        };
        match (0..rows).find(|&r| !m.row_padding_is_zero(r)) {
            Some(r) => Err(r),
            None => Ok(m),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Words per row.
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn words(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "index ({row}, {col}) out of bounds");
        let w = self.data[row * self.stride + col / WORD_BITS];
        (w >> (col % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.rows && col < self.cols, "index ({row}, {col}) out of bounds");
        let w = &mut self.data[row * self.stride + col / WORD_BITS];
        let bit = 1u64 << (col % WORD_BITS);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.data[row * self.stride..(row + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, row: usize) -> &mut [u64] {
        &mut self.data[row * self.stride..(row + 1) * self.stride]
    }

    /// Column indices of the set bits in `row`, ascending.
    pub fn row_ones(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_words(row).iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + b)
            })
        })
    }

    pub fn row_is_zero(&self, row: usize) -> bool {
        self.row_words(row).iter().all(|&w| w == 0)
    }

    pub fn row_count_ones(&self, row: usize) -> usize {
        self.row_words(row).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn row_padding_is_zero(&self, row: usize) -> bool {
        if self.stride == 0 {
            return true;
        }
        let last = self.row_words(row)[self.stride - 1];
        last & !tail_mask(self.cols) == 0
    }

    /// True when every padding bit of every row is zero.
    pub fn padding_is_zero(&self) -> bool {
        (0..self.rows).all(|r| self.row_padding_is_zero(r))
    }

    /// Positions where `self` and `other` differ. Shapes must match.
    pub fn diff(&self, other: &BoolMatrix) -> Result<Vec<(usize, usize)>> {
        self.check_same_shape(other, "diff")?;
        let mut out = Vec::new();
        for r in 0..self.rows {
            let (a, b) = (self.row_words(r), other.row_words(r));
            for (wi, (&x, &y)) in a.iter().zip(b).enumerate() {
                let mut d = x ^ y;
                while d != 0 {
                    out.push((r, wi * WORD_BITS + d.trailing_zeros() as usize));
                    d &= d - 1;
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BoolMatrix {
        let mut out = BoolMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row_ones(r) {
                out.set(c, r, true);
            }
        }
        out
    }

    fn check_same_shape(&self, other: &BoolMatrix, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn or(&self, other: &BoolMatrix) -> Result<BoolMatrix> {
        self.check_same_shape(other, "elementwise_or")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a | b).collect();
        Ok(BoolMatrix { data, ..*self })
    }

    pub fn and(&self, other: &BoolMatrix) -> Result<BoolMatrix> {
        self.check_same_shape(other, "elementwise_and")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a & b).collect();
        Ok(BoolMatrix { data, ..*self })
    }

    /// Entrywise complement.
    pub fn not(&self) -> BoolMatrix {
        let mut out = self.clone();
        for r in 0..self.rows {
            let row = out.row_words_mut(r);
            for w in row.iter_mut() {
                *w = !*w;
            }
            mask_tail(row, self.cols);
        }
        out
    }

    /// `self ≤ other` entrywise.
    pub fn is_subset_of(&self, other: &BoolMatrix) -> bool {
        self.shape() == other.shape() && self.data.iter().zip(&other.data).all(|(a, b)| a & !b == 0)
    }

    /// Boolean product `self · rhs`: entry `(i, j)` is 1 iff some `k` has
    /// `self(i, k) = rhs(k, j) = 1`.
    pub fn bool_product(&self, rhs: &BoolMatrix) -> Result<BoolMatrix> {
        self.bool_product_counted(rhs, &mut OpCounter::new())
    }

    pub fn bool_product_counted(&self, rhs: &BoolMatrix, ops: &mut OpCounter) -> Result<BoolMatrix> {
        self.check_inner(rhs, "bool_product")?;
        let mut out = BoolMatrix::zeros(self.rows, rhs.cols);
        let stride = out.stride;
        for i in 0..self.rows {
            let acc = &mut out.data[i * stride..(i + 1) * stride];
            for k in self.row_ones(i) {
                for (a, b) in acc.iter_mut().zip(rhs.row_words(k)) {
                    *a |= *b;
                }
                ops.add(stride);
            }
        }
        Ok(out)
    }

    /// The `⊙` product: entry `(i, j)` is 1 iff `self(i, k) ≤ rhs(k, j)` for
    /// every `k`. With an empty inner dimension the result is all ones.
    pub fn odot_product(&self, rhs: &BoolMatrix) -> Result<BoolMatrix> {
        self.odot_product_counted(rhs, &mut OpCounter::new())
    }

    pub fn odot_product_counted(&self, rhs: &BoolMatrix, ops: &mut OpCounter) -> Result<BoolMatrix> {
        self.check_inner(rhs, "odot_product")?;
        let mut out = BoolMatrix::ones(self.rows, rhs.cols);
        let stride = out.stride;
        for i in 0..self.rows {
            let acc = &mut out.data[i * stride..(i + 1) * stride];
            for k in self.row_ones(i) {
                let mut live = 0u64;
                for (a, b) in acc.iter_mut().zip(rhs.row_words(k)) {
                    *a &= *b;
                    live |= *a;
                }
                ops.add(stride);
                // an all-zero accumulator stays zero
                if live == 0 {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn check_inner(&self, rhs: &BoolMatrix, op: &'static str) -> Result<()> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(())
    }

    /// Assembles `[[tl, tr], [bl, br]]`.
    pub fn block_compose(tl: &BoolMatrix, tr: &BoolMatrix, bl: &BoolMatrix, br: &BoolMatrix) -> Result<BoolMatrix> {
        let conformal = tl.rows == tr.rows && bl.rows == br.rows && tl.cols == bl.cols && tr.cols == br.cols;
        if !conformal {
            let (left, right) = if tl.rows != tr.rows || tl.cols != bl.cols {
                (tl.shape(), if tl.rows != tr.rows { tr.shape() } else { bl.shape() })
            } else {
                (bl.shape(), if bl.rows != br.rows { br.shape() } else { tr.shape() })
            };
            return Err(Error::Dimension {
                op: "block_compose",
                left,
                right,
            });
        }
        let mut out = BoolMatrix::zeros(tl.rows + bl.rows, tl.cols + tr.cols);
        out.paste(tl, 0, 0);
        out.paste(tr, 0, tl.cols);
        out.paste(bl, tl.rows, 0);
        out.paste(br, tl.rows, tl.cols);
        Ok(out)
    }

    /// ORs `src` into `self` with its top-left corner at `(row, col)`.
    pub(crate) fn paste(&mut self, src: &BoolMatrix, row: usize, col: usize) {
        assert!(row + src.rows <= self.rows && col + src.cols <= self.cols);
        for r in 0..src.rows {
            let dst = self.row_words_mut(row + r);
            or_shifted(dst, col, src.row_words(r));
        }
    }

    /// Copy of the block `rows × cols`.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> BoolMatrix {
        assert!(rows.end <= self.rows && cols.end <= self.cols);
        let width = cols.end.saturating_sub(cols.start);
        let mut out = BoolMatrix::zeros(rows.end.saturating_sub(rows.start), width);
        for (o, r) in rows.enumerate() {
            extract_bits(self.row_words(r), cols.start, width, out.row_words_mut(o));
        }
        out
    }

    /// Copy with `rows × cols` shape whose top-left corner is `self`.
    pub fn grown(&self, rows: usize, cols: usize) -> BoolMatrix {
        assert!(rows >= self.rows && cols >= self.cols);
        let mut out = BoolMatrix::zeros(rows, cols);
        for r in 0..self.rows {
            out.row_words_mut(r)[..self.stride].copy_from_slice(self.row_words(r));
        }
        out
    }

    /// Entrywise OR of `delta` into the block starting at the origin,
    /// skipping zero words.
    pub(crate) fn join_top_left(&mut self, delta: &BoolMatrix, ops: &mut OpCounter) {
        assert!(delta.rows <= self.rows && delta.stride <= self.stride);
        for r in 0..delta.rows {
            let src = delta.row_words(r);
            let dst = self.row_words_mut(r);
            for (d, &s) in dst.iter_mut().zip(src) {
                if s != 0 {
                    *d |= s;
                    ops.add(1);
                }
            }
        }
    }

    /// Entrywise AND of `delta` into the block starting at the origin,
    /// skipping all-ones words. `delta` must span whole rows of `self`'s
    /// top-left `delta.rows × delta.cols` block.
    pub(crate) fn meet_top_left(&mut self, delta: &BoolMatrix, ops: &mut OpCounter) {
        assert!(delta.rows <= self.rows && delta.cols <= self.cols);
        let full = delta.stride.saturating_sub(1);
        let tail = tail_mask(delta.cols);
        for r in 0..delta.rows {
            let src = delta.row_words(r);
            let dst = self.row_words_mut(r);
            for (wi, (d, &s)) in dst.iter_mut().zip(src).enumerate() {
                // columns beyond delta.cols in a shared last word are untouched
                let keep = if wi == full { !tail } else { 0 };
                let s = s | keep;
                if s != !0 {
                    *d &= s;
                    ops.add(1);
                }
            }
        }
    }
}

fn fill_ones(row: &mut [u64], cols: usize) {
    row.fill(!0);
    mask_tail(row, cols);
}

fn mask_tail(row: &mut [u64], cols: usize) {
    if let Some(last) = row.last_mut() {
        *last &= tail_mask(cols);
    }
}

/// ORs the bits of `src` into `dst` starting at bit `offset`.
fn or_shifted(dst: &mut [u64], offset: usize, src: &[u64]) {
    let (wo, bo) = (offset / WORD_BITS, offset % WORD_BITS);
    for (i, &w) in src.iter().enumerate() {
        if w == 0 {
            continue;
        }
        if bo == 0 {
            dst[wo + i] |= w;
        } else {
            dst[wo + i] |= w << bo;
            let hi = w >> (WORD_BITS - bo);
            if hi != 0 {
                dst[wo + i + 1] |= hi;
            }
        }
    }
}

/// Writes bits `start..start+len` of `src` into `dst` (which has
/// `words_for(len)` zeroed words).
fn extract_bits(src: &[u64], start: usize, len: usize, dst: &mut [u64]) {
    let (wo, bo) = (start / WORD_BITS, start % WORD_BITS);
    for (i, d) in dst.iter_mut().enumerate() {
        let lo = src.get(wo + i).copied().unwrap_or(0) >> bo;
        let hi = if bo == 0 {
            0
        } else {
            src.get(wo + i + 1).copied().unwrap_or(0) << (WORD_BITS - bo)
        };
        *d = lo | hi;
    }
    mask_tail(dst, len);
}

impl fmt::Display for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            if r + 1 < self.rows {
                f.write_str("\n")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BoolMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            f.write_str("  ")?;
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        f.write_str("]")
    }
}

/// Parses whitespace-separated rows of `0`/`1` digits, e.g. `"110 010 001"`.
impl FromStr for BoolMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, tok) in s.split_whitespace().enumerate() {
            let row: Vec<u8> = tok
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::parse(i + 1, format!("bad matrix digit `{c}`"))),
                })
                .collect::<Result<_>>()?;
            if let Some(first) = rows.first() {
                let first: &Vec<u8> = first;
                if first.len() != row.len() {
                    return Err(Error::parse(i + 1, "ragged matrix row"));
                }
            }
            rows.push(row);
        }
        Ok(BoolMatrix::from_rows(&rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> BoolMatrix {
        s.parse().unwrap()
    }

    #[test]
    fn identity_is_left_neutral() {
        let b = m("101 011 110");
        assert_eq!(BoolMatrix::identity(3).bool_product(&b).unwrap(), b);
    }

    #[test]
    fn characteristic_products_of_the_worked_covering() {
        let rep = m("110 010 001 111");
        let t = rep.transpose();
        assert_eq!(rep.bool_product(&t).unwrap(), m("1101 1101 0011 1111"));
        assert_eq!(rep.odot_product(&t).unwrap(), m("1001 1101 0011 0001"));
    }

    #[test]
    fn odot_of_zero_left_is_all_ones() {
        let a = BoolMatrix::zeros(3, 4);
        let b = m("1010 0000 1111 0001");
        assert_eq!(
            a.odot_product(&b.submatrix(0..4, 0..3)).unwrap(),
            BoolMatrix::ones(3, 3)
        );
    }

    #[test]
    fn empty_inner_dimension() {
        let a = BoolMatrix::zeros(2, 0);
        let b = BoolMatrix::zeros(0, 3);
        assert_eq!(a.odot_product(&b).unwrap(), BoolMatrix::ones(2, 3));
        assert_eq!(a.bool_product(&b).unwrap(), BoolMatrix::zeros(2, 3));
    }

    #[test]
    fn dimension_errors_name_both_shapes() {
        let a = BoolMatrix::zeros(2, 3);
        let b = BoolMatrix::zeros(2, 3);
        let err = a.bool_product(&b).unwrap_err();
        assert_eq!(
            err.to_string(),
            "dimension mismatch in bool_product: left is 2x3, right is 2x3"
        );
        assert!(matches!(a.odot_product(&b), Err(Error::Dimension { .. })));
        assert!(matches!(a.or(&BoolMatrix::zeros(3, 2)), Err(Error::Dimension { .. })));
        assert!(matches!(a.and(&BoolMatrix::zeros(3, 2)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn transpose_cases() {
        assert_eq!(BoolMatrix::zeros(0, 0).transpose(), BoolMatrix::zeros(0, 0));
        assert_eq!(m("110 010").transpose(), m("10 11 00"));
    }

    #[test]
    fn lattice_ops() {
        let a = m("10 01");
        assert_eq!(a.or(&m("01 00")).unwrap(), m("11 01"));
        assert_eq!(a.or(&BoolMatrix::zeros(2, 2)).unwrap(), a);
        assert_eq!(a.and(&BoolMatrix::ones(2, 2)).unwrap(), a);
    }

    #[test]
    fn block_compose_cases() {
        let z = |r, c| BoolMatrix::zeros(r, c);
        assert_eq!(
            BoolMatrix::block_compose(&z(2, 2), &z(2, 1), &z(1, 2), &z(1, 1)).unwrap(),
            z(3, 3)
        );
        let out = BoolMatrix::block_compose(&m("1"), &m("0"), &m("1"), &m("1")).unwrap();
        assert_eq!(out, m("10 11"));
        let out = BoolMatrix::block_compose(&z(4, 4), &z(4, 2), &z(2, 4), &z(2, 2)).unwrap();
        assert_eq!(out.shape(), (6, 6));
        assert!(BoolMatrix::block_compose(&z(2, 2), &z(3, 1), &z(1, 2), &z(1, 1)).is_err());
        assert!(BoolMatrix::block_compose(&z(2, 2), &z(2, 1), &z(1, 3), &z(1, 1)).is_err());
    }

    #[test]
    fn wide_blocks_cross_word_boundaries() {
        let tl = BoolMatrix::from_fn(3, 70, |i, j| (i + j) % 3 == 0);
        let tr = BoolMatrix::from_fn(3, 65, |i, j| (i * j) % 5 == 1);
        let bl = BoolMatrix::from_fn(2, 70, |i, j| j % 7 == i);
        let br = BoolMatrix::from_fn(2, 65, |_, j| j % 2 == 0);
        let out = BoolMatrix::block_compose(&tl, &tr, &bl, &br).unwrap();
        assert!(out.padding_is_zero());
        assert_eq!(out.submatrix(0..3, 0..70), tl);
        assert_eq!(out.submatrix(0..3, 70..135), tr);
        assert_eq!(out.submatrix(3..5, 0..70), bl);
        assert_eq!(out.submatrix(3..5, 70..135), br);
    }

    #[test]
    fn meet_leaves_columns_outside_delta() {
        let mut big = BoolMatrix::ones(3, 5);
        let mut ops = OpCounter::new();
        big.meet_top_left(&BoolMatrix::zeros(2, 3), &mut ops);
        assert_eq!(big, m("00011 00011 11111"));
        assert_eq!(ops.get(), 2);
    }

    #[test]
    fn from_words_rejects_padding() {
        assert_eq!(BoolMatrix::from_words(2, 3, vec![0b101, 0b1000]), Err(1));
        assert!(BoolMatrix::from_words(2, 3, vec![0b101, 0b011]).is_ok());
        assert!(BoolMatrix::from_words(2, 3, vec![0b101]).is_err());
    }

    #[test]
    fn complement_keeps_padding_clear() {
        let a = m("101 000");
        let c = a.not();
        assert_eq!(c, m("010 111"));
        assert!(c.padding_is_zero());
    }
}
