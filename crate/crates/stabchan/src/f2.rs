//! Dense bit-packed linear algebra over F2.
//!
//! Vectors and matrices are stored as 64-bit words and all row operations are
//! word-wide XORs. This is the kernel under every other module: fault vectors,
//! syndromes, outcome-flip vectors and the channel matrices all live here.

use std::fmt;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Fixed-length vector over F2, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = BitVec::zeros(0);
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Vector with exactly one bit set.
    pub fn unit(len: usize, idx: usize) -> Self {
        let mut v = BitVec::zeros(len);
        v.set(idx, true);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % WORD_BITS == 0 {
            self.words.push(0);
        }
        let idx = self.len;
        self.len += 1;
        self.set(idx, bit);
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        debug_assert!(idx < self.len);
        (self.words[idx / WORD_BITS] >> (idx % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, idx: usize, bit: bool) {
        debug_assert!(idx < self.len);
        let mask = 1u64 << (idx % WORD_BITS);
        if bit {
            self.words[idx / WORD_BITS] |= mask;
        } else {
            self.words[idx / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, idx: usize) {
        self.words[idx / WORD_BITS] ^= 1u64 << (idx % WORD_BITS);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len);
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        out
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(wi * WORD_BITS + b);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn lowest_set(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn highest_set(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(wi * WORD_BITS + (WORD_BITS - 1 - w.leading_zeros() as usize));
            }
        }
        None
    }

    /// Concatenate two vectors.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.support() {
            out.set(i, true);
        }
        for i in other.support() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Extract bits [lo, hi).
    pub fn slice(&self, lo: usize, hi: usize) -> BitVec {
        assert!(lo <= hi && hi <= self.len);
        let mut out = BitVec::zeros(hi - lo);
        for i in lo..hi {
            if self.get(i) {
                out.set(i - lo, true);
            }
        }
        out
    }

    pub fn resized(&self, len: usize) -> BitVec {
        let mut out = BitVec::zeros(len);
        for i in self.support() {
            if i < len {
                out.set(i, true);
            }
        }
        out
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromIterator<bool> for BitVec {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitVec::from_bits(iter)
    }
}

/// Dense row-major matrix over F2.
#[derive(Clone, PartialEq, Eq)]
pub struct F2Matrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        F2Matrix {
            rows: vec![BitVec::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = F2Matrix::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitVec>, cols: usize) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        F2Matrix { rows, cols }
    }

    /// Build from string rows like ["110", "011"], for tests and small fixtures.
    pub fn parse(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| BitVec::from_bits(r.chars().map(|c| c == '1')))
            .collect();
        F2Matrix { rows, cols }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row_mut(&mut self, i: usize) -> &mut BitVec {
        &mut self.rows[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        self.rows[r].set(c, bit);
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        let (a, b) = if src < dst {
            let (lo, hi) = self.rows.split_at_mut(dst);
            (&lo[src], &mut hi[0])
        } else {
            let (lo, hi) = self.rows.split_at_mut(src);
            (&hi[0], &mut lo[dst])
        };
        b.xor_assign(a);
    }

    /// Matrix-vector product m·v.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        BitVec::from_bits(self.rows.iter().map(|r| r.dot(v)))
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut out = F2Matrix::zeros(self.cols, self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.support() {
                out.rows[j].set(i, true);
            }
        }
        out
    }

    /// Stack rows of `self` on top of rows of `other`.
    pub fn stack(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, other.cols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        F2Matrix { rows, cols: self.cols }
    }

    pub fn column(&self, c: usize) -> BitVec {
        BitVec::from_bits(self.rows.iter().map(|r| r.get(c)))
    }

    pub fn column_weight(&self, c: usize) -> usize {
        self.rows.iter().filter(|r| r.get(c)).count()
    }

    /// Reduced row-echelon form, rank, and pivot columns.
    ///
    /// Pivots are chosen at the leftmost nonzero column, lowest row index, so
    /// the output is deterministic. Zero rows are dropped from the result.
    pub fn row_reduce(&self) -> (F2Matrix, usize, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            let Some(src) = (pivot_row..m.rows.len()).find(|&r| m.rows[r].get(col)) else {
                continue;
            };
            m.rows.swap(pivot_row, src);
            for r in 0..m.rows.len() {
                if r != pivot_row && m.rows[r].get(col) {
                    m.xor_row_into(pivot_row, r);
                }
            }
            pivots.push(col);
            pivot_row += 1;
            if pivot_row == m.rows.len() {
                break;
            }
        }
        m.rows.truncate(pivot_row);
        (m, pivot_row, pivots)
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().1
    }

    /// Basis for the right kernel {v : m·v = 0}, one row per basis vector.
    pub fn kernel_basis(&self) -> F2Matrix {
        let (red, rank, pivots) = self.row_reduce();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = F2Matrix::zeros(0, self.cols);
        basis.rows.reserve(free.len());
        for &f in &free {
            let mut v = BitVec::zeros(self.cols);
            v.set(f, true);
            for r in 0..rank {
                if red.rows[r].get(f) {
                    v.set(pivots[r], true);
                }
            }
            basis.rows.push(v);
        }
        basis
    }

    /// Any solution x of m·x = b, or None when b is outside the column space.
    pub fn solve(&self, b: &BitVec) -> Option<BitVec> {
        assert_eq!(b.len(), self.rows.len(), "rhs length must match rows");
        // Eliminate on the augmented matrix [m | b].
        let mut aug: Vec<BitVec> = self
            .rows
            .iter()
            .zip(b.iter())
            .map(|(r, bit)| {
                let mut row = r.clone();
                row.push(bit);
                row
            })
            .collect();
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..cols {
            let Some(src) = (pivot_row..aug.len()).find(|&r| aug[r].get(col)) else {
                continue;
            };
            aug.swap(pivot_row, src);
            for r in 0..aug.len() {
                if r != pivot_row && aug[r].get(col) {
                    let (pr, tr) = if pivot_row < r {
                        let (lo, hi) = aug.split_at_mut(r);
                        (&lo[pivot_row], &mut hi[0])
                    } else {
                        let (lo, hi) = aug.split_at_mut(pivot_row);
                        (&hi[0], &mut lo[r])
                    };
                    tr.xor_assign(pr);
                }
            }
            pivots.push(col);
            pivot_row += 1;
            if pivot_row == aug.len() {
                break;
            }
        }
        // Inconsistent if any zero row has rhs 1.
        for r in aug.iter().skip(pivots.len()) {
            if r.get(cols) {
                return None;
            }
        }
        let mut x = BitVec::zeros(cols);
        for (i, &p) in pivots.iter().enumerate() {
            if aug[i].get(cols) {
                x.set(p, true);
            }
        }
        Some(x)
    }

    /// Is v in the row space?
    pub fn rowspace_contains(&self, v: &BitVec) -> bool {
        self.transpose().solve(v).is_some()
    }

    /// Express v over the rows: coefficients c with Σ c_i · row_i = v.
    pub fn express_in_rows(&self, v: &BitVec) -> Option<BitVec> {
        self.transpose().solve(v)
    }

    /// Basis for rowspace(self) ∩ rowspace(other).
    ///
    /// Zassenhaus-style: row-reduce [A|A; B|0]; rows whose left half is zero
    /// carry intersection elements in the right half.
    pub fn rowspace_intersection(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, other.cols, "column counts must match");
        let n = self.cols;
        let mut work: Vec<BitVec> = Vec::with_capacity(self.rows.len() + other.rows.len());
        for r in &self.rows {
            work.push(r.concat(r));
        }
        for r in &other.rows {
            work.push(r.concat(&BitVec::zeros(n)));
        }
        let m = F2Matrix::from_rows(work, 2 * n);
        let (red, rank, _) = m.row_reduce();
        let mut out = F2Matrix::zeros(0, n);
        for i in 0..rank {
            let left = red.rows[i].slice(0, n);
            if left.is_zero() {
                let right = red.rows[i].slice(n, 2 * n);
                if !right.is_zero() {
                    out.rows.push(right);
                }
            }
        }
        out
    }
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{}", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> F2Matrix {
        let mut m = F2Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, rng.gen_bool(0.5));
            }
        }
        m
    }

    #[test]
    fn row_reduce_identity() {
        let m = F2Matrix::identity(2);
        let (red, rank, pivots) = m.row_reduce();
        assert_eq!(red, m);
        assert_eq!(rank, 2);
        assert_eq!(pivots, vec![0, 1]);
    }

    #[test]
    fn row_reduce_zero() {
        let m = F2Matrix::zeros(3, 4);
        let (red, rank, pivots) = m.row_reduce();
        assert_eq!(red.n_rows(), 0);
        assert_eq!(rank, 0);
        assert!(pivots.is_empty());
    }

    #[test]
    fn row_reduce_dependent_rows() {
        // third row is the XOR of the first two
        let m = F2Matrix::parse(&["110", "011", "101"]);
        let (_, rank, _) = m.row_reduce();
        assert_eq!(rank, 2);
    }

    #[test]
    fn row_reduce_idempotent() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_matrix(&mut rng, 6, 9);
            let (red, _, _) = m.row_reduce();
            let (red2, _, _) = red.row_reduce();
            assert_eq!(red, red2);
        }
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let m = F2Matrix::identity(4);
        assert_eq!(m.kernel_basis().n_rows(), 0);
    }

    #[test]
    fn kernel_of_parity_row() {
        let m = F2Matrix::parse(&["111"]);
        let k = m.kernel_basis();
        assert_eq!(k.n_rows(), 2);
        for r in k.rows() {
            assert!(!m.mul_vec(r).get(0));
        }
    }

    #[test]
    fn kernel_annihilates_randomized() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 6, 10);
            let k = m.kernel_basis();
            assert_eq!(k.n_rows(), 10 - m.rank());
            for r in k.rows() {
                assert!(m.mul_vec(r).is_zero());
            }
        }
    }

    #[test]
    fn solve_identity() {
        let m = F2Matrix::identity(5);
        let b = BitVec::from_bits([true, false, true, true, false]);
        assert_eq!(m.solve(&b).unwrap(), b);
    }

    #[test]
    fn solve_underdetermined() {
        let m = F2Matrix::parse(&["11"]);
        let b = BitVec::from_bits([true]);
        let x = m.solve(&b).unwrap();
        assert!(m.mul_vec(&x).get(0));
    }

    #[test]
    fn solve_no_solution() {
        // b has a unit in a row outside the column space
        let m = F2Matrix::parse(&["10", "10"]);
        let b = BitVec::from_bits([true, false]);
        assert!(m.solve(&b).is_none());
    }

    #[test]
    fn solve_none_iff_rank_grows() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..50 {
            let m = random_matrix(&mut rng, 5, 7);
            let b = BitVec::from_bits((0..5).map(|_| rng.gen_bool(0.5)));
            let mut aug_rows = Vec::new();
            for (i, r) in m.rows().iter().enumerate() {
                let mut row = r.clone();
                row.push(b.get(i));
                aug_rows.push(row);
            }
            let aug = F2Matrix::from_rows(aug_rows, 8);
            let solvable = m.solve(&b).is_some();
            assert_eq!(solvable, aug.rank() == m.rank());
            if let Some(x) = m.solve(&b) {
                assert_eq!(m.mul_vec(&x), b);
            }
        }
    }

    #[test]
    fn intersection_with_self() {
        let m = F2Matrix::parse(&["100", "010"]);
        let i = m.rowspace_intersection(&m);
        assert_eq!(i.rank(), 2);
        for r in i.rows() {
            assert!(m.rowspace_contains(r));
        }
    }

    #[test]
    fn intersection_disjoint() {
        let a = F2Matrix::parse(&["100"]);
        let b = F2Matrix::parse(&["010"]);
        assert_eq!(a.rowspace_intersection(&b).n_rows(), 0);
    }

    #[test]
    fn intersection_partial() {
        let a = F2Matrix::parse(&["100", "010"]);
        let b = F2Matrix::parse(&["110", "001"]);
        let i = a.rowspace_intersection(&b);
        assert_eq!(i.rank(), 1);
        assert!(i.rowspace_contains(&BitVec::from_bits([true, true, false])));
    }

    #[test]
    fn intersection_dimension_formula() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 4, 8);
            let b = random_matrix(&mut rng, 5, 8);
            let i = a.rowspace_intersection(&b);
            assert_eq!(i.rank(), a.rank() + b.rank() - a.stack(&b).rank());
            for r in i.rows() {
                assert!(a.rowspace_contains(r));
                assert!(b.rowspace_contains(r));
            }
        }
    }
}
