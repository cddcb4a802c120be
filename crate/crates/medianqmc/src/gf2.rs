//! Dense bit linear algebra over GF(2), capped at 64 rows and columns.
//!
//! Digit alignment: bit ℓ−1 of a word holds binary digit ℓ, so the most
//! significant *fractional* digit (weight 1/2) lives in bit 0. An index
//! vector i⃗, a coordinate digit vector x⃗, a mode vector k⃗ and a shift D⃗
//! are all `BitVectorE` values under this one convention.
//!
//! Matrices are stored column-major — one word per column — because point
//! generation XORs the columns selected by the bits of the point index.
//! Addition is XOR, multiplication is AND, and a dot product is the parity
//! of a popcount, so every operation here is a handful of word ops.

use crate::rng::{BitBuffer, RandomBits};

#[inline]
pub(crate) fn low_mask(e: u32) -> u64 {
    debug_assert!(e <= 64);
    if e == 64 {
        u64::MAX
    } else {
        (1u64 << e) - 1
    }
}

/// Reverse the low `k` bits of `word` (1 ≤ k ≤ 64): out bit ℓ−1 = in bit k−ℓ.
/// Converts between digit-aligned words and k-digit fixed-point prefixes.
#[inline]
pub(crate) fn reverse_low_bits(word: u64, k: u32) -> u64 {
    debug_assert!((1..=64).contains(&k));
    (word << (64 - k)).reverse_bits()
}

#[inline]
fn parity(word: u64) -> u64 {
    u64::from(word.count_ones() & 1 == 1)
}

/// An E-bit column vector over GF(2), E ≤ 64. Bit ℓ−1 holds digit ℓ;
/// bits at positions ≥ E are kept zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitVectorE {
    bits: u64,
    e: u32,
}

impl BitVectorE {
    /// # Panics
    ///
    /// Panics if `e > 64` or `bits` has a bit set at position ≥ `e`.
    pub fn new(bits: u64, e: u32) -> Self {
        assert!(e <= 64, "precision above 64 bits");
        assert_eq!(bits & !low_mask(e), 0, "bits beyond position E must be zero");
        BitVectorE { bits, e }
    }

    pub fn zero(e: u32) -> Self {
        Self::new(0, e)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> u32 {
        self.e
    }

    pub fn is_empty(&self) -> bool {
        self.e == 0
    }

    /// Digit ℓ (1-based), i.e. bit ℓ−1.
    pub fn digit(&self, l: u32) -> bool {
        debug_assert!((1..=self.e).contains(&l));
        self.bits >> (l - 1) & 1 == 1
    }

    pub fn xor(&self, other: &BitVectorE) -> BitVectorE {
        debug_assert_eq!(self.e, other.e);
        BitVectorE {
            bits: self.bits ^ other.bits,
            e: self.e,
        }
    }
}

/// An E×m matrix over GF(2): m columns of E bits each. Column j is the
/// image of the unit vector e_j.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: Vec<u64>,
    e: u32,
}

impl BitMatrix {
    /// # Panics
    ///
    /// Panics if there are no columns or any column violates the E-bit
    /// zero-padding invariant.
    pub fn from_cols(cols: Vec<u64>, e: u32) -> Self {
        assert!(!cols.is_empty(), "a matrix needs at least one column");
        assert!(e <= 64);
        for &c in &cols {
            assert_eq!(c & !low_mask(e), 0, "column bits beyond E must be zero");
        }
        BitMatrix { cols, e }
    }

    pub fn zero(e: u32, m: u32) -> Self {
        Self::from_cols(vec![0; m as usize], e)
    }

    /// Rectangular identity: column j = e_j (requires E ≥ m).
    pub fn identity(e: u32, m: u32) -> Self {
        assert!(e >= m);
        Self::from_cols((0..m).map(|j| 1u64 << j).collect(), e)
    }

    pub fn rows(&self) -> u32 {
        self.e
    }

    pub fn ncols(&self) -> u32 {
        self.cols.len() as u32
    }

    pub fn col(&self, j: u32) -> BitVectorE {
        BitVectorE {
            bits: self.cols[j as usize],
            e: self.e,
        }
    }

    pub fn col_bits(&self, j: u32) -> u64 {
        self.cols[j as usize]
    }

    pub fn cols(&self) -> &[u64] {
        &self.cols
    }

    pub fn entry(&self, row: u32, col: u32) -> bool {
        debug_assert!(row < self.e);
        self.cols[col as usize] >> row & 1 == 1
    }

    /// Zero-pad to `e` rows (the column words are unchanged).
    pub fn padded(&self, e: u32) -> BitMatrix {
        assert!(e >= self.e);
        BitMatrix {
            cols: self.cols.clone(),
            e,
        }
    }
}

/// M·v over GF(2): XOR of the columns selected by the low m bits of `v`.
pub fn matvec(m: &BitMatrix, v: BitVectorE) -> BitVectorE {
    let mut acc = 0u64;
    let mut sel = v.bits() & low_mask(m.ncols().min(v.len()));
    while sel != 0 {
        let j = sel.trailing_zeros();
        acc ^= m.cols[j as usize];
        sel &= sel - 1;
    }
    BitVectorE { bits: acc, e: m.e }
}

/// k⃗ᵀ·M over GF(2): bit j of the result is the parity of popcount(k AND column j).
pub fn vecmat(k: BitVectorE, m: &BitMatrix) -> BitVectorE {
    let mut out = 0u64;
    for (j, &col) in m.cols.iter().enumerate() {
        out |= parity(k.bits() & col) << j;
    }
    BitVectorE {
        bits: out,
        e: m.ncols(),
    }
}

/// A·B over GF(2); A is E×k, B is k×m, result E×m.
///
/// # Panics
///
/// Panics when the inner dimensions disagree.
pub fn matmul_gf2(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(a.ncols(), b.rows(), "inner dimensions disagree");
    let cols = (0..b.ncols()).map(|j| matvec(a, b.col(j)).bits()).collect();
    BitMatrix { cols, e: a.e }
}

/// Random E×m lower-unitriangular matrix: unit diagonal, zero above, iid
/// Bernoulli(1/2) strictly below. Consumes packed bits column by column
/// (column j draws its E−1−j free bits before column j+1 draws any).
///
/// # Panics
///
/// Panics if `e < m`.
pub fn random_lower_unitriangular(e: u32, m: u32, rng: &mut impl RandomBits) -> BitMatrix {
    assert!(e >= m, "lower-unitriangular shape needs E ≥ m");
    assert!(m >= 1);
    let mut buf = BitBuffer::new(rng);
    let cols = (0..m)
        .map(|j| {
            let free = e - 1 - j;
            (1u64 << j) | (buf.take(free) << (j + 1))
        })
        .collect();
    BitMatrix { cols, e }
}

/// Column rank via Gaussian elimination. Test oracle for invertibility of
/// scrambling matrices; not a production routine.
pub fn rank(m: &BitMatrix) -> u32 {
    let mut cols: Vec<u64> = m.cols.clone();
    let mut rank = 0;
    for row in 0..m.e {
        let Some(p) = (rank..cols.len() as u32).find(|&j| cols[j as usize] >> row & 1 == 1) else {
            continue;
        };
        cols.swap(rank as usize, p as usize);
        let pivot = cols[rank as usize];
        for (j, col) in cols.iter_mut().enumerate() {
            if j != rank as usize && *col >> row & 1 == 1 {
                *col ^= pivot;
            }
        }
        rank += 1;
        if rank == cols.len() as u32 {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;

    /// Bit-by-bit mod-2 oracle for M·v.
    fn matvec_oracle(m: &BitMatrix, v: u64) -> u64 {
        let mut out = 0u64;
        for row in 0..m.rows() {
            let mut acc = 0u64;
            for col in 0..m.ncols() {
                let mbit = u64::from(m.entry(row, col));
                let vbit = v >> col & 1;
                acc ^= mbit & vbit;
            }
            out |= acc << row;
        }
        out
    }

    /// Double-loop mod-2 oracle for k⃗ᵀ·M.
    fn vecmat_oracle(k: u64, m: &BitMatrix) -> u64 {
        let mut out = 0u64;
        for col in 0..m.ncols() {
            let mut acc = 0u64;
            for row in 0..m.rows() {
                acc ^= (k >> row & 1) & u64::from(m.entry(row, col));
            }
            out |= acc << col;
        }
        out
    }

    fn random_matrix(e: u32, m: u32, rng: &mut impl RandomBits) -> BitMatrix {
        let mask = if e == 64 { u64::MAX } else { (1 << e) - 1 };
        BitMatrix::from_cols((0..m).map(|_| rng.next_u64() & mask).collect(), e)
    }

    #[test]
    fn matvec_identity_passes_through() {
        let m = BitMatrix::identity(4, 4);
        let v = BitVectorE::new(0b1010, 4);
        assert_eq!(matvec(&m, v).bits(), 0b1010);
    }

    #[test]
    fn matvec_equal_columns_cancel() {
        let m = BitMatrix::from_cols(vec![0b11, 0b11], 2);
        let v = BitVectorE::new(0b11, 2);
        assert_eq!(matvec(&m, v).bits(), 0);
    }

    #[test]
    fn matvec_matches_bitwise_oracle() {
        let mut rng = SeedTree::new(11).rng();
        for _ in 0..20 {
            let m = random_matrix(3, 3, &mut rng);
            for v in 0..8u64 {
                assert_eq!(
                    matvec(&m, BitVectorE::new(v, 3)).bits(),
                    matvec_oracle(&m, v)
                );
            }
        }
    }

    #[test]
    fn vecmat_zero_row_vector() {
        let mut rng = SeedTree::new(12).rng();
        let m = random_matrix(4, 3, &mut rng);
        assert_eq!(vecmat(BitVectorE::zero(4), &m).bits(), 0);
    }

    #[test]
    fn vecmat_identity_truncates() {
        let m = BitMatrix::identity(4, 4);
        for k in 0..16u64 {
            assert_eq!(vecmat(BitVectorE::new(k, 4), &m).bits(), k);
        }
    }

    #[test]
    fn vecmat_matches_double_loop_oracle() {
        let mut rng = SeedTree::new(13).rng();
        for _ in 0..20 {
            let m = random_matrix(4, 3, &mut rng);
            for k in 0..16u64 {
                assert_eq!(
                    vecmat(BitVectorE::new(k, 4), &m).bits(),
                    vecmat_oracle(k, &m)
                );
            }
        }
    }

    #[test]
    fn matmul_identity_left_and_right() {
        let mut rng = SeedTree::new(14).rng();
        let a = random_matrix(5, 3, &mut rng);
        let i3 = BitMatrix::identity(3, 3);
        assert_eq!(matmul_gf2(&a, &i3), a);

        let b = random_matrix(3, 3, &mut rng);
        let i53 = BitMatrix::identity(5, 3);
        let padded = matmul_gf2(&i53, &b);
        assert_eq!(padded.rows(), 5);
        assert_eq!(padded.cols(), b.cols());
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = SeedTree::new(15).rng();
        for _ in 0..20 {
            let a = random_matrix(4, 3, &mut rng);
            let b = random_matrix(3, 3, &mut rng);
            let c = matmul_gf2(&a, &b);
            for row in 0..4 {
                for col in 0..3 {
                    let mut acc = false;
                    for inner in 0..3 {
                        acc ^= a.entry(row, inner) && b.entry(inner, col);
                    }
                    assert_eq!(c.entry(row, col), acc);
                }
            }
        }
    }

    #[test]
    fn unitriangular_one_by_one_is_identity() {
        let mut rng = SeedTree::new(16).rng();
        for _ in 0..10 {
            let m = random_lower_unitriangular(1, 1, &mut rng);
            assert_eq!(m.col_bits(0), 1);
        }
    }

    #[test]
    fn unitriangular_free_entry_frequency_is_half() {
        // E=3, m=2: free entries are (1,0), (2,0), (2,1).
        let mut rng = SeedTree::new(17).rng();
        let n = 100_000;
        let mut counts = [0u64; 3];
        for _ in 0..n {
            let m = random_lower_unitriangular(3, 2, &mut rng);
            counts[0] += u64::from(m.entry(1, 0));
            counts[1] += u64::from(m.entry(2, 0));
            counts[2] += u64::from(m.entry(2, 1));
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
        }
    }

    #[test]
    fn unitriangular_unit_diagonal_everywhere() {
        let mut rng = SeedTree::new(18).rng();
        for _ in 0..50 {
            let m = random_lower_unitriangular(6, 4, &mut rng);
            let e0 = matvec(&m, BitVectorE::new(1, 4));
            assert!(e0.digit(1));
            for j in 0..4 {
                assert!(m.entry(j, j));
                for above in 0..j {
                    assert!(!m.entry(above, j), "nonzero above the diagonal");
                }
            }
        }
    }

    #[test]
    fn matvec_is_gf2_linear_exhaustively() {
        let mut rng = SeedTree::new(19).rng();
        for m_cols in 1..=4u32 {
            let m = random_matrix(4, m_cols, &mut rng);
            for a in 0..1u64 << m_cols {
                for b in 0..1u64 << m_cols {
                    let lhs = matvec(&m, BitVectorE::new(a ^ b, m_cols));
                    let rhs = matvec(&m, BitVectorE::new(a, m_cols))
                        .xor(&matvec(&m, BitVectorE::new(b, m_cols)));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn vecmat_associates_with_matmul_exhaustively() {
        // (k·A)·B = k·(A·B) for all k, small shapes.
        let mut rng = SeedTree::new(20).rng();
        for e in 1..=4u32 {
            for m_cols in 1..=4u32 {
                let a = random_matrix(e, m_cols, &mut rng);
                let b = random_matrix(m_cols, m_cols, &mut rng);
                let ab = matmul_gf2(&a, &b);
                for k in 0..1u64 << e {
                    let kv = BitVectorE::new(k, e);
                    assert_eq!(vecmat(vecmat(kv, &a), &b), vecmat(kv, &ab));
                }
            }
        }
    }

    #[test]
    fn unitriangular_has_full_column_rank() {
        let mut rng = SeedTree::new(21).rng();
        for draw in 0..100 {
            let m_cols = 1 + draw % 8;
            let m = random_lower_unitriangular(12, m_cols, &mut rng);
            assert_eq!(rank(&m), m_cols);
        }
    }
}
