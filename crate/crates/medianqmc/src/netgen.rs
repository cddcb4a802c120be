//! Digital net construction: Sobol' base matrices from Joe-Kuo direction
//! numbers, three randomization schemes, and point generation.
//!
//! Points follow x⃗_ij = C_j·i⃗ ⊕ D⃗_j over GF(2). Each coordinate's digit
//! vector is stored two ways:
//!
//! * digit-aligned (`BitVectorE`, gf2 convention): bit ℓ−1 = digit ℓ, the
//!   form the linear algebra works in;
//! * fixed-point code (`u64`): digit 1 in bit 63, so x = code·2^(−64).
//!   `PointBlock` stores these; the two differ by `reverse_bits`.
//!
//! Traversal is plain index order i = 0..2^m−1. `generate_points` computes
//! one matvec per index straight from the definition; `PointStream` is the
//! incremental fast path (XOR by a column-prefix table at each step) and
//! must produce the identical block.

use std::sync::{Arc, OnceLock};

use crate::gf2::{self, matmul_gf2, matvec, reverse_low_bits, BitMatrix, BitVectorE};
use crate::rng::{BitBuffer, RandomBits, SeedTree};

/// Digit precision E of production nets.
pub const PRECISION: u32 = 64;

/// Stream labels: dimension j draws its matrix bits and shift bits from
/// independent child streams so the two never alias.
pub const ROLE_MATRIX: u64 = 0;
pub const ROLE_SHIFT: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("direction numbers, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dimension {dim} exceeds the loaded direction-number table (max {max})")]
    DimensionRange { dim: u32, max: u32 },
    #[error("base matrices have {have} columns but the net needs {need}")]
    SizeMismatch { have: u32, need: u32 },
    #[error("base matrices cover {have} dimensions but the net needs {need}")]
    BaseCoverage { have: u32, need: u32 },
}

/// One row of a Joe-Kuo direction-number table: primitive-polynomial data
/// for a single Sobol' dimension ≥ 2.
///
/// Invariants (enforced by [`parse_direction_numbers`]): `initial_m.len()
/// == degree`, every `initial_m[i]` is odd and `< 2^(i+1)`, and
/// `poly_coeff < 2^(degree−1)` (it encodes the polynomial's interior
/// coefficients).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionNumberEntry {
    pub dim_index: u32,
    pub degree: u32,
    pub poly_coeff: u64,
    pub initial_m: Vec<u64>,
}

/// A parsed direction-number table covering dimensions 2..=max_dimension.
/// Dimension 1 needs no entry (van der Corput).
#[derive(Clone, Debug)]
pub struct DirectionNumbers {
    entries: Vec<DirectionNumberEntry>,
}

impl DirectionNumbers {
    /// Largest usable dimension: table entries plus the implicit dimension 1.
    pub fn max_dimension(&self) -> u32 {
        self.entries.len() as u32 + 1
    }

    pub fn entry(&self, dim: u32) -> Option<&DirectionNumberEntry> {
        if dim < 2 {
            return None;
        }
        self.entries.get(dim as usize - 2)
    }

    /// The bundled new-joe-kuo-6 table (21201 dimensions), parsed once.
    pub fn embedded() -> &'static DirectionNumbers {
        static EMBEDDED: OnceLock<DirectionNumbers> = OnceLock::new();
        EMBEDDED.get_or_init(|| {
            parse_direction_numbers(include_str!("../data/new-joe-kuo-6.21201"))
                .expect("bundled direction-number table is valid")
        })
    }
}

/// Parse a "d s a m_1 … m_s" direction-number table: one header line, then
/// one whitespace-separated row per dimension, contiguous from 2.
pub fn parse_direction_numbers(text: &str) -> Result<DirectionNumbers, NetError> {
    let fail = |line: usize, message: String| NetError::Parse { line, message };
    let mut entries: Vec<DirectionNumberEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if idx == 0 || raw.trim().is_empty() {
            continue; // header, trailing blank
        }
        let mut tok = raw.split_whitespace();
        let mut next_u64 = |name: &str| -> Result<u64, NetError> {
            let t = tok
                .next()
                .ok_or_else(|| fail(line, format!("missing {name}")))?;
            t.parse::<u64>()
                .map_err(|_| fail(line, format!("{name} is not an unsigned integer: {t:?}")))
        };
        let dim = next_u64("dimension index")?;
        let expected = entries.len() as u64 + 2;
        if dim != expected {
            return Err(fail(
                line,
                format!("dimension {dim} out of order (expected {expected})"),
            ));
        }
        let degree = next_u64("degree")?;
        if degree == 0 || degree > 63 {
            return Err(fail(line, format!("degree {degree} out of range 1..=63")));
        }
        let poly_coeff = next_u64("polynomial coefficient")?;
        if poly_coeff >> (degree - 1) != 0 {
            return Err(fail(
                line,
                format!("polynomial coefficient {poly_coeff} too large for degree {degree}"),
            ));
        }
        let mut initial_m = Vec::with_capacity(degree as usize);
        for i in 0..degree {
            let m = next_u64(&format!("m[{i}]"))?;
            if m % 2 == 0 {
                return Err(fail(line, format!("direction number m[{i}] = {m} is even")));
            }
            if m >> (i + 1) != 0 {
                return Err(fail(
                    line,
                    format!("direction number m[{i}] = {m} not below 2^{}", i + 1),
                ));
            }
            initial_m.push(m);
        }
        if let Some(extra) = tok.next() {
            return Err(fail(line, format!("unexpected trailing token {extra:?}")));
        }
        entries.push(DirectionNumberEntry {
            dim_index: dim as u32,
            degree: degree as u32,
            poly_coeff,
            initial_m,
        });
    }
    if entries.is_empty() {
        return Err(fail(1, "no direction-number rows found".into()));
    }
    Ok(DirectionNumbers { entries })
}

/// Build the m×m Sobol' generating matrix for one dimension. `None` is
/// dimension 1, the identity (van der Corput). For entries, column k holds
/// the direction number v_k = m_k·2^(−k); past the tabulated degree the
/// m-values extend by
/// m_k = 2^s·m_{k−s} ⊕ m_{k−s} ⊕ (⊕_{i=1}^{s−1} 2^i·a_i·m_{k−i}),
/// with a_i bit s−1−i of the polynomial coefficient.
///
/// All m_k stay odd, so every column has digit k set: the matrix is
/// upper-unitriangular in digit order, hence nonsingular.
pub fn sobol_matrix(entry: Option<&DirectionNumberEntry>, m: u32) -> BitMatrix {
    assert!((1..=64).contains(&m));
    let Some(entry) = entry else {
        return BitMatrix::identity(m, m);
    };
    let s = entry.degree as usize;
    let mut mv: Vec<u64> = entry.initial_m.iter().take(m as usize).copied().collect();
    while mv.len() < m as usize {
        let k = mv.len();
        let mut next = (mv[k - s] << s) ^ mv[k - s];
        for i in 1..s {
            if entry.poly_coeff >> (s - 1 - i) & 1 == 1 {
                next ^= mv[k - i] << i;
            }
        }
        mv.push(next);
    }
    let cols = (1..=m)
        .map(|k| reverse_low_bits(mv[k as usize - 1], k))
        .collect();
    BitMatrix::from_cols(cols, m)
}

/// The base (unscrambled) matrices 𝒞_1..𝒞_s, all m×m. Immutable; shared
/// across replicates behind an `Arc`.
#[derive(Clone, Debug)]
pub struct GeneratingMatrixSet {
    matrices: Vec<BitMatrix>,
    m: u32,
}

impl GeneratingMatrixSet {
    /// Sobol' matrices for dimensions 1..=s from a direction-number table.
    pub fn sobol(s: u32, m: u32, table: &DirectionNumbers) -> Result<Self, NetError> {
        assert!(s >= 1);
        let mut matrices = Vec::with_capacity(s as usize);
        for dim in 1..=s {
            let entry = if dim == 1 {
                None
            } else {
                Some(table.entry(dim).ok_or(NetError::DimensionRange {
                    dim,
                    max: table.max_dimension(),
                })?)
            };
            matrices.push(sobol_matrix(entry, m));
        }
        Ok(GeneratingMatrixSet { matrices, m })
    }

    pub fn from_matrices(matrices: Vec<BitMatrix>) -> Self {
        assert!(!matrices.is_empty());
        let m = matrices[0].ncols();
        for mat in &matrices {
            assert_eq!(mat.ncols(), m);
            assert_eq!(mat.rows(), m);
        }
        GeneratingMatrixSet { matrices, m }
    }

    pub fn s(&self) -> u32 {
        self.matrices.len() as u32
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Base matrix of coordinate `j` (0-based; coordinate j is dimension j+1).
    pub fn matrix(&self, j: u32) -> &BitMatrix {
        &self.matrices[j as usize]
    }
}

/// Tag identifying a randomization scheme without its payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Rls,
    Crd,
    ShiftOnly,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Rls => "RLS",
            SchemeKind::Crd => "CRD",
            SchemeKind::ShiftOnly => "ShiftOnly",
        }
    }
}

/// How one replicate's net is randomized. Every scheme draws fresh iid
/// Bernoulli(1/2) digital shifts; they differ in the matrices:
///
/// * `Rls`: C_j = M_j·𝒞_j with M_j a random E×m lower-unitriangular matrix
///   (random linear scrambling of a base net);
/// * `Crd`: every entry of C_j iid Bernoulli(1/2) (completely random design);
/// * `ShiftOnly`: C_j = 𝒞_j zero-padded to E rows (digital shift only).
#[derive(Clone)]
pub enum RandomizationScheme {
    Rls(Arc<GeneratingMatrixSet>),
    Crd,
    ShiftOnly(Arc<GeneratingMatrixSet>),
}

impl RandomizationScheme {
    pub fn kind(&self) -> SchemeKind {
        match self {
            RandomizationScheme::Rls(_) => SchemeKind::Rls,
            RandomizationScheme::Crd => SchemeKind::Crd,
            RandomizationScheme::ShiftOnly(_) => SchemeKind::ShiftOnly,
        }
    }
}

/// One randomized net: scrambled matrices C_j (E×m) and digital shifts D_j.
#[derive(Clone, Debug)]
pub struct RandomizedNet {
    matrices: Vec<BitMatrix>,
    shifts: Vec<BitVectorE>,
    m: u32,
    e: u32,
}

impl RandomizedNet {
    /// Assemble a net from explicit parts (test hook: lets tests pin C and D).
    pub fn from_parts(matrices: Vec<BitMatrix>, shifts: Vec<BitVectorE>, m: u32) -> Self {
        assert!(!matrices.is_empty());
        assert_eq!(matrices.len(), shifts.len());
        let e = matrices[0].rows();
        assert!(m >= 1 && e >= m && m <= 32);
        for (mat, shift) in matrices.iter().zip(&shifts) {
            assert_eq!(mat.rows(), e);
            assert_eq!(mat.ncols(), m);
            assert_eq!(shift.len(), e);
        }
        RandomizedNet {
            matrices,
            shifts,
            m,
            e,
        }
    }

    pub fn s(&self) -> u32 {
        self.matrices.len() as u32
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.e
    }

    pub fn num_points(&self) -> u64 {
        1 << self.m
    }

    pub fn matrix(&self, j: u32) -> &BitMatrix {
        &self.matrices[j as usize]
    }

    pub fn shift(&self, j: u32) -> BitVectorE {
        self.shifts[j as usize]
    }

    /// Fixed-point code of coordinate j of point i, straight from the
    /// definition: reverse_bits(C_j·i⃗ ⊕ D_j).
    pub fn code(&self, i: u64, j: u32) -> u64 {
        debug_assert!(i < self.num_points());
        let digits = matvec(&self.matrices[j as usize], BitVectorE::new(i, self.m));
        digits.xor(&self.shifts[j as usize]).bits().reverse_bits()
    }
}

/// Completely-random-design matrix draw: every entry iid Bernoulli(1/2),
/// consumed as packed bits column by column (column j takes its E bits
/// before column j+1 takes any).
pub fn random_matrix(e: u32, m: u32, rng: &mut impl RandomBits) -> BitMatrix {
    let mut buf = BitBuffer::new(rng);
    BitMatrix::from_cols((0..m).map(|_| buf.take(e)).collect(), e)
}

/// Randomize one net at full 64-digit precision. `stream` is this
/// replicate's seed subtree; dimension j and role (matrix vs shift) derive
/// independent child streams, so replicates generated from sibling
/// subtrees are iid and order-independent.
pub fn randomize(
    scheme: &RandomizationScheme,
    s: u32,
    m: u32,
    stream: &SeedTree,
) -> Result<RandomizedNet, NetError> {
    randomize_with_precision(scheme, s, m, PRECISION, stream)
}

/// As [`randomize`] with explicit digit precision E (test hook; E ≤ 4 makes
/// exhaustive enumeration over all nets feasible).
pub fn randomize_with_precision(
    scheme: &RandomizationScheme,
    s: u32,
    m: u32,
    e: u32,
    stream: &SeedTree,
) -> Result<RandomizedNet, NetError> {
    assert!(s >= 1 && (1..=32).contains(&m) && e >= m && e <= 64);
    if let RandomizationScheme::Rls(base) | RandomizationScheme::ShiftOnly(base) = scheme {
        if base.m() != m {
            return Err(NetError::SizeMismatch {
                have: base.m(),
                need: m,
            });
        }
        if base.s() < s {
            return Err(NetError::BaseCoverage {
                have: base.s(),
                need: s,
            });
        }
    }
    let mut matrices = Vec::with_capacity(s as usize);
    let mut shifts = Vec::with_capacity(s as usize);
    for j in 0..s {
        let dim_stream = stream.child(j as u64);
        let c = match scheme {
            RandomizationScheme::Rls(base) => {
                let mut rng = dim_stream.child(ROLE_MATRIX).rng();
                let scramble = gf2::random_lower_unitriangular(e, m, &mut rng);
                matmul_gf2(&scramble, base.matrix(j))
            }
            RandomizationScheme::Crd => {
                let mut rng = dim_stream.child(ROLE_MATRIX).rng();
                random_matrix(e, m, &mut rng)
            }
            RandomizationScheme::ShiftOnly(base) => base.matrix(j).padded(e),
        };
        let mut rng = dim_stream.child(ROLE_SHIFT).rng();
        let d = BitBuffer::new(&mut rng).take(e);
        matrices.push(c);
        shifts.push(BitVectorE::new(d, e));
    }
    Ok(RandomizedNet::from_parts(matrices, shifts, m))
}

/// All 2^m points of a net, one matvec per (point, coordinate). This is the
/// reference generator; [`PointStream`] must match it exactly.
pub fn generate_points(net: &RandomizedNet) -> PointBlock {
    let s = net.s();
    let n = net.num_points();
    let mut codes = Vec::with_capacity((n as usize) * s as usize);
    for i in 0..n {
        for j in 0..s {
            codes.push(net.code(i, j));
        }
    }
    PointBlock {
        codes,
        s,
        m: net.m(),
    }
}

/// Incremental point generator in index order. Going from i to i+1 flips
/// index bits 0..=t with t = trailing_zeros(i+1), so the new point is the
/// old one XOR a precomputed prefix of matrix columns. Works directly on
/// fixed-point codes (bit reversal commutes with XOR). O(s) per point.
pub struct PointStream {
    /// Current point's fixed-point codes, one per coordinate.
    codes: Vec<u64>,
    /// prefix[j·m + t] = reversed(col_0 ⊕ … ⊕ col_t) of C_j.
    prefix: Vec<u64>,
    m: u32,
    next: u64,
    count: u64,
}

impl PointStream {
    pub fn new(net: &RandomizedNet) -> Self {
        let s = net.s() as usize;
        let m = net.m();
        let mut prefix = Vec::with_capacity(s * m as usize);
        for j in 0..net.s() {
            let mut acc = 0u64;
            for t in 0..m {
                acc ^= net.matrix(j).col_bits(t);
                prefix.push(acc.reverse_bits());
            }
        }
        let codes = (0..net.s())
            .map(|j| net.shift(j).bits().reverse_bits())
            .collect();
        PointStream {
            codes,
            prefix,
            m,
            next: 0,
            count: net.num_points(),
        }
    }

    /// Next point as (index, fixed-point codes); the slice is valid until
    /// the following call.
    pub fn advance(&mut self) -> Option<(u64, &[u64])> {
        if self.next == self.count {
            return None;
        }
        let i = self.next;
        if i > 0 {
            let t = i.trailing_zeros();
            let m = self.m as usize;
            for (j, code) in self.codes.iter_mut().enumerate() {
                *code ^= self.prefix[j * m + t as usize];
            }
        }
        self.next = i + 1;
        Some((i, &self.codes))
    }

    /// Drain the stream into a full block.
    pub fn collect_block(mut self) -> PointBlock {
        let s = self.codes.len();
        let mut codes = Vec::with_capacity(self.count as usize * s);
        while let Some((_, row)) = self.advance() {
            codes.extend_from_slice(row);
        }
        PointBlock {
            codes,
            s: s as u32,
            m: self.m,
        }
    }
}

/// 2^m × s block of fixed-point coordinate codes, point-major: point i's
/// coordinates are contiguous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointBlock {
    codes: Vec<u64>,
    s: u32,
    m: u32,
}

impl PointBlock {
    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn num_points(&self) -> u64 {
        1 << self.m
    }

    pub fn code(&self, i: u64, j: u32) -> u64 {
        self.codes[i as usize * self.s as usize + j as usize]
    }

    /// Coordinate as a float in [0, 1).
    pub fn coord(&self, i: u64, j: u32) -> f64 {
        code_to_unit(self.code(i, j))
    }

    pub fn row(&self, i: u64) -> &[u64] {
        let s = self.s as usize;
        &self.codes[i as usize * s..(i as usize + 1) * s]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.codes.chunks_exact(self.s as usize)
    }
}

/// Fixed-point code → float in [0, 1). Truncates to the 53 leading digits
/// so the conversion is exact and never rounds up to 1.0.
#[inline]
pub fn code_to_unit(code: u64) -> f64 {
    (code >> 11) as f64 * 2f64.powi(-53)
}
