//! Dense bit-packed linear algebra over GF(2).
//!
//! Vectors and matrices are stored as `u64` words, 64 bits per word, bit `i`
//! of a row at word `i / 64`, position `i % 64`. All operations are defined
//! purely by their GF(2) semantics; the packing is not observable.

use std::fmt;

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    pub fn from_indices(len: usize, idx: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in idx {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        let w = i / 64;
        let b = i % 64;
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the AND with `other` (the GF(2) inner product).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// The low 64 bits as a mask. Only meaningful when `len <= 64`.
    pub fn low_word(&self) -> u64 {
        assert!(self.len <= 64, "vector longer than one word");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_word(len: usize, word: u64) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len == 64 { !0 } else { (1u64 << len) - 1 };
            v.words[0] = word & mask;
        }
        v
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        Ok(())
    }
}

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    wpr: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let wpr = cols.div_ceil(64);
        Self {
            rows,
            cols,
            wpr,
            words: vec![0; rows * wpr],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitVec], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row length mismatch");
            m.words[i * m.wpr..(i + 1) * m.wpr].copy_from_slice(r.words());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.words[r * self.wpr + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let idx = r * self.wpr + c / 64;
        let b = c % 64;
        if value {
            self.words[idx] |= 1 << b;
        } else {
            self.words[idx] &= !(1 << b);
        }
    }

    pub fn row(&self, r: usize) -> BitVec {
        assert!(r < self.rows, "row {r} out of range");
        BitVec {
            len: self.cols,
            words: self.words[r * self.wpr..(r + 1) * self.wpr].to_vec(),
        }
    }

    pub fn row_iter(&self) -> impl Iterator<Item = BitVec> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn push_row(&mut self, row: &BitVec) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.words.extend_from_slice(row.words());
        self.rows += 1;
    }

    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert!(src < self.rows && dst < self.rows);
        let (s, d) = (src * self.wpr, dst * self.wpr);
        for w in 0..self.wpr {
            let v = self.words[s + w];
            self.words[d + w] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (a, b) = (a * self.wpr, b * self.wpr);
        for w in 0..self.wpr {
            self.words.swap(a + w, b + w);
        }
    }

    /// Row-reduced echelon form with leftmost-pivot, lowest-row tie-breaking.
    /// Returns the reduced matrix and the pivot columns.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r >= m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c)) else {
                continue;
            };
            m.swap_rows(r, pr);
            for i in 0..m.rows {
                if i != r && m.get(i, c) {
                    m.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// True iff `v` is a GF(2) linear combination of the rows.
    pub fn in_row_space(&self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let (r, pivots) = self.rref();
        let mut rem = v.clone();
        for (i, &p) in pivots.iter().enumerate() {
            if rem.get(p) {
                rem.xor_assign(&r.row(i));
            }
        }
        rem.is_zero()
    }

    /// Basis of `{x : self * x^T = 0}`, one row per free column.
    pub fn null_space(&self) -> BitMatrix {
        let (r, pivots) = self.rref();
        let mut basis = BitMatrix::zeros(0, self.cols);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        for f in 0..self.cols {
            if is_pivot[f] {
                continue;
            }
            let mut v = BitVec::zeros(self.cols);
            v.set(f, true);
            for (i, &p) in pivots.iter().enumerate() {
                if r.get(i, f) {
                    v.set(p, true);
                }
            }
            basis.push_row(&v);
        }
        basis
    }

    /// Matrix containing exactly the masked columns, in ascending index order.
    pub fn select_columns(&self, mask: &BitVec) -> BitMatrix {
        assert_eq!(mask.len(), self.cols, "dimension mismatch");
        let keep: Vec<usize> = mask.iter_ones().collect();
        let mut m = BitMatrix::zeros(self.rows, keep.len());
        for r in 0..self.rows {
            for (j, &c) in keep.iter().enumerate() {
                if self.get(r, c) {
                    m.set(r, j, true);
                }
            }
        }
        m
    }

    /// `self * v^T`: one parity bit per row.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = 0u64;
            for (w, b) in self.words[r * self.wpr..(r + 1) * self.wpr]
                .iter()
                .zip(v.words())
            {
                acc ^= w & b;
            }
            out.set(r, acc.count_ones() % 2 == 1);
        }
        out
    }

    /// `x * self` for a row vector `x` of length `rows`.
    pub fn vec_mul(&self, x: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.rows, "dimension mismatch");
        let mut out = BitVec::zeros(self.cols);
        for r in x.iter_ones() {
            let base = r * self.wpr;
            for w in 0..self.wpr {
                let v = self.words[base + w];
                out.words[w] ^= v;
            }
        }
        out
    }

    /// `self * other^T`, shape `self.rows x other.rows`.
    pub fn mul_transpose(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                let mut acc = 0u64;
                for w in 0..self.wpr {
                    acc ^= self.words[i * self.wpr + w] & other.words[j * other.wpr + w];
                }
                if acc.count_ones() % 2 == 1 {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.set(c, r, true);
                }
            }
        }
        out
    }

    /// Solves `x * self = b` over GF(2); `None` when inconsistent.
    pub fn solve_left(&self, b: &BitVec) -> Option<BitVec> {
        assert_eq!(b.len(), self.cols, "dimension mismatch");
        // Augment the transpose with b and reduce.
        let mut aug = BitMatrix::zeros(self.cols, self.rows + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    aug.set(c, r, true);
                }
            }
        }
        for c in 0..self.cols {
            if b.get(c) {
                aug.set(c, self.rows, true);
            }
        }
        let (red, pivots) = aug.rref();
        let mut x = BitVec::zeros(self.rows);
        for (i, &p) in pivots.iter().enumerate() {
            if p == self.rows {
                return None;
            }
            if red.get(i, self.rows) {
                x.set(p, true);
            }
        }
        Some(x)
    }

    /// Inverse of a square invertible matrix.
    pub fn inverse(&self) -> Option<BitMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut aug = BitMatrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                if self.get(r, c) {
                    aug.set(r, c, true);
                }
            }
            aug.set(r, n + r, true);
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = BitMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                if red.get(r, n + c) {
                    inv.set(r, c, true);
                }
            }
        }
        Some(inv)
    }

    /// Row `r` as a `u64` mask. Only valid when `cols <= 64`.
    pub fn row_mask(&self, r: usize) -> u64 {
        assert!(self.cols <= 64, "matrix wider than one word");
        assert!(r < self.rows);
        self.words.get(r * self.wpr).copied().unwrap_or(0)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
