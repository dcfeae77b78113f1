//! Exact linear algebra over F_p.
//!
//! Matrices are stored as sorted sparse triplets. Elimination works one row at
//! a time against a dense scratch buffer and a min-heap of touched columns, so
//! the cost of reducing a row is proportional to the fill it actually meets
//! rather than to the ambient dimension. Pivoting is deterministic: a row's
//! pivot is its first nonzero column after reduction.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Sparse vector: `(index, nonzero residue)` pairs sorted by index.
pub type SparseVec = Vec<(usize, u32)>;

const NO_PIVOT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    // sorted row-major, no zeros, no duplicates
    entries: Vec<(usize, usize, u32)>,
}

impl SparseMatrix {
    pub fn zero(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        Self {
            field,
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, 1)).collect(),
        }
    }

    /// Builds a matrix from triplets. Duplicate positions are summed and the
    /// values may be any residues (they are reduced mod p).
    pub fn from_triplets<I>(field: PrimeField, rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let mut acc: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "entry ({r}, {c}) outside {rows}x{cols}");
            let slot = acc.entry((r, c)).or_insert(0);
            *slot = field.add(*slot, field.reduce(v as u64));
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, v)| v != 0)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Self {
            field,
            rows,
            cols,
            entries,
        }
    }

    /// Builds a matrix from signed integer rows.
    pub fn from_dense(field: PrimeField, cols: usize, dense: &[Vec<i64>]) -> Self {
        let triplets = dense.iter().enumerate().flat_map(|(r, row)| {
            assert_eq!(row.len(), cols);
            row.iter()
                .enumerate()
                .map(move |(c, &v)| (r, c, field.from_i64(v)))
        });
        Self::from_triplets(field, dense.len(), cols, triplets)
    }

    pub fn from_rows(field: PrimeField, cols: usize, rows: &[SparseVec]) -> Self {
        let triplets = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)));
        Self::from_triplets(field, rows.len(), cols, triplets)
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(field: PrimeField, rows: usize, columns: &[SparseVec]) -> Self {
        let triplets = columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)));
        Self::from_triplets(field, rows, columns.len(), triplets)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, u32)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries
            .binary_search_by(|&(er, ec, _)| (er, ec).cmp(&(r, c)))
            .map(|i| self.entries[i].2)
            .unwrap_or(0)
    }

    pub fn row_vecs(&self) -> Vec<SparseVec> {
        let mut out = vec![Vec::new(); self.rows];
        for &(r, c, v) in &self.entries {
            out[r].push((c, v));
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_unstable();
        Self {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let f = self.field;
        let rhs = other.row_vecs();
        let triplets = self.entries.iter().flat_map(|&(r, k, a)| {
            rhs[k].iter().map(move |&(c, b)| (r, c, f.mul(a, b)))
        });
        Self::from_triplets(f, self.rows, other.cols, triplets)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_triplets(
            self.field,
            self.rows,
            self.cols,
            self.entries.iter().chain(other.entries.iter()).copied(),
        )
    }

    pub fn scale(&self, s: u32) -> Self {
        let f = self.field;
        Self::from_triplets(
            f,
            self.rows,
            self.cols,
            self.entries.iter().map(|&(r, c, v)| (r, c, f.mul(v, s))),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(self.field.p() - 1))
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(self.field, self.rows);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            exp >>= 1;
        }
        acc
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[(usize, u32)]) -> SparseVec {
        let f = self.field;
        let mut dense: BTreeMap<usize, u32> = BTreeMap::new();
        let lookup: BTreeMap<usize, u32> = v.iter().copied().collect();
        for &(r, c, a) in &self.entries {
            if let Some(&x) = lookup.get(&c) {
                let slot = dense.entry(r).or_insert(0);
                *slot = f.add(*slot, f.mul(a, x));
            }
        }
        dense.into_iter().filter(|&(_, v)| v != 0).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        let mut out = vec![vec![0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            out[r][c] = v;
        }
        out
    }
}

/// Dense scratch row with a heap of touched columns.
#[derive(Debug, Clone)]
struct Workspace {
    buf: Vec<u32>,
    heap: BinaryHeap<Reverse<usize>>,
}

impl Workspace {
    fn new(ncols: usize) -> Self {
        Self {
            buf: vec![0; ncols],
            heap: BinaryHeap::new(),
        }
    }

    #[inline]
    fn axpy(&mut self, f: PrimeField, scale: u32, row: &[(usize, u32)]) {
        for &(c, v) in row {
            let old = self.buf[c];
            let new = f.sub(old, f.mul(scale, v));
            if old == 0 && new != 0 {
                self.heap.push(Reverse(c));
            }
            self.buf[c] = new;
        }
    }

    fn load(&mut self, f: PrimeField, row: &[(usize, u32)]) {
        for &(c, v) in row {
            let v = f.reduce(v as u64);
            let old = self.buf[c];
            let new = f.add(old, v);
            if old == 0 && new != 0 {
                self.heap.push(Reverse(c));
            }
            self.buf[c] = new;
        }
    }

    /// Eliminates every entry sitting on a pivot column and drains the rest.
    fn reduce(
        &mut self,
        f: PrimeField,
        rows: &[SparseVec],
        pivot_of_col: &[u32],
        skip_pivot: Option<usize>,
    ) -> SparseVec {
        let mut out = Vec::new();
        while let Some(Reverse(c)) = self.heap.pop() {
            let v = self.buf[c];
            if v == 0 {
                continue;
            }
            let piv = pivot_of_col[c];
            if piv != NO_PIVOT && skip_pivot != Some(c) {
                self.axpy(f, v, &rows[piv as usize]);
                debug_assert_eq!(self.buf[c], 0);
            } else {
                out.push((c, v));
                self.buf[c] = 0;
            }
        }
        out
    }
}

/// Incrementally built row-echelon basis.
///
/// Stored rows have leading coefficient 1 and no entries on pivot columns
/// that existed when they were inserted; [`Echelon::into_subspace`] finishes
/// the back-substitution.
#[derive(Debug, Clone)]
pub struct Echelon {
    field: PrimeField,
    ncols: usize,
    rows: Vec<SparseVec>,
    pivot_of_col: Vec<u32>,
    work: Workspace,
}

impl Echelon {
    pub fn new(field: PrimeField, ncols: usize) -> Self {
        Self {
            field,
            ncols,
            rows: Vec::new(),
            pivot_of_col: vec![NO_PIVOT; ncols],
            work: Workspace::new(ncols),
        }
    }

    pub fn from_subspace(s: &Subspace) -> Self {
        let mut e = Self::new(s.field, s.ambient);
        for (i, row) in s.rows.iter().enumerate() {
            e.pivot_of_col[row[0].0] = i as u32;
        }
        e.rows = s.rows.clone();
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Reduces `v` against the current rows; the result has no entries on
    /// pivot columns.
    pub fn reduce(&mut self, v: &[(usize, u32)]) -> SparseVec {
        self.work.load(self.field, v);
        self.work
            .reduce(self.field, &self.rows, &self.pivot_of_col, None)
    }

    pub fn contains(&mut self, v: &[(usize, u32)]) -> bool {
        self.reduce(v).is_empty()
    }

    /// Adds `v` to the span. Returns the new pivot column if the rank grew.
    pub fn insert(&mut self, v: &[(usize, u32)]) -> Option<usize> {
        let mut rest = self.reduce(v);
        if rest.is_empty() {
            return None;
        }
        let f = self.field;
        let (pivot, lead) = rest[0];
        if lead != 1 {
            let inv = f.inv(lead);
            for e in rest.iter_mut() {
                e.1 = f.mul(e.1, inv);
            }
        }
        self.pivot_of_col[pivot] = self.rows.len() as u32;
        self.rows.push(rest);
        Some(pivot)
    }

    pub fn into_subspace(mut self) -> Subspace {
        let f = self.field;
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_unstable_by_key(|&i| Reverse(self.rows[i][0].0));
        // Largest pivots first: every row used for elimination is already reduced.
        for &i in &order {
            let row = std::mem::take(&mut self.rows[i]);
            let pivot = row[0].0;
            let needs_work = row[1..]
                .iter()
                .any(|&(c, _)| self.pivot_of_col[c] != NO_PIVOT);
            if needs_work {
                self.work.load(f, &row);
                self.rows[i] =
                    self.work
                        .reduce(f, &self.rows, &self.pivot_of_col, Some(pivot));
            } else {
                self.rows[i] = row;
            }
        }
        let mut rows = self.rows;
        rows.sort_unstable_by_key(|r| r[0].0);
        Subspace {
            field: f,
            ambient: self.ncols,
            rows,
        }
    }
}

/// A subspace of F_p^n held as a reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    field: PrimeField,
    ambient: usize,
    rows: Vec<SparseVec>,
}

impl Subspace {
    pub fn zero(field: PrimeField, ambient: usize) -> Self {
        Self {
            field,
            ambient,
            rows: Vec::new(),
        }
    }

    pub fn full(field: PrimeField, ambient: usize) -> Self {
        Self::spanned_by_units(field, ambient, 0..ambient)
    }

    /// Span of the given standard basis vectors.
    pub fn spanned_by_units<I: IntoIterator<Item = usize>>(
        field: PrimeField,
        ambient: usize,
        units: I,
    ) -> Self {
        let mut idx: Vec<usize> = units.into_iter().collect();
        idx.sort_unstable();
        idx.dedup();
        assert!(idx.last().is_none_or(|&i| i < ambient));
        Self {
            field,
            ambient,
            rows: idx.into_iter().map(|i| vec![(i, 1)]).collect(),
        }
    }

    pub fn from_rows<'a, I>(field: PrimeField, ambient: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a SparseVec>,
    {
        let mut e = Echelon::new(field, ambient);
        for r in rows {
            e.insert(r);
        }
        e.into_subspace()
    }

    /// Wraps rows already known to be in reduced row-echelon form.
    ///
    /// Panics if the rows violate the echelon invariants.
    pub fn from_rref_rows(field: PrimeField, ambient: usize, rows: Vec<SparseVec>) -> Self {
        let pivots: Vec<usize> = rows.iter().map(|r| r[0].0).collect();
        assert!(pivots.windows(2).all(|w| w[0] < w[1]), "pivots not increasing");
        for r in &rows {
            assert_eq!(r[0].1, 1, "pivot is not 1");
            assert!(r.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(r.last().unwrap().0 < ambient);
            for &(c, _) in &r[1..] {
                assert!(pivots.binary_search(&c).is_err(), "entry on pivot column");
            }
        }
        Self {
            field,
            ambient,
            rows,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r[0].0).collect()
    }

    /// Remainder of `v` modulo the subspace (zero on every pivot column).
    pub fn reduce(&self, v: &[(usize, u32)]) -> SparseVec {
        Echelon::from_subspace(self).reduce(v)
    }

    pub fn contains(&self, v: &[(usize, u32)]) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        check_ambient(self, other)?;
        let mut e = Echelon::from_subspace(self);
        for r in &other.rows {
            e.insert(r);
        }
        Ok(e.into_subspace())
    }

    pub fn is_subspace_of(&self, other: &Self) -> Result<bool> {
        check_ambient(self, other)?;
        let mut e = Echelon::from_subspace(other);
        Ok(self.rows.iter().all(|r| e.contains(r)))
    }

    pub fn intersection_dim(&self, other: &Self) -> Result<usize> {
        let sum = self.sum(other)?;
        Ok(self.dim() + other.dim() - sum.dim())
    }

    pub fn to_matrix(&self) -> SparseMatrix {
        SparseMatrix::from_rows(self.field, self.ambient, &self.rows)
    }
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient != b.ambient {
        return Err(Error::AmbientMismatch {
            left: a.ambient,
            right: b.ambient,
        });
    }
    Ok(())
}

/// Reduced row-echelon form and rank.
pub fn rref(m: &SparseMatrix) -> (SparseMatrix, usize) {
    let s = row_space(m);
    let rank = s.dim();
    (s.to_matrix(), rank)
}

pub fn rank(m: &SparseMatrix) -> usize {
    let mut e = Echelon::new(m.field, m.cols);
    for r in m.row_vecs() {
        e.insert(&r);
    }
    e.rank()
}

pub fn row_space(m: &SparseMatrix) -> Subspace {
    Subspace::from_rows(m.field, m.cols, &m.row_vecs())
}

/// `{v : m v = 0}`.
pub fn nullspace(m: &SparseMatrix) -> Subspace {
    let f = m.field;
    let r = row_space(m);
    let mut is_pivot = vec![false; m.cols];
    for row in &r.rows {
        is_pivot[row[0].0] = true;
    }
    // free column -> entries (pivot column, value) from the rref rows
    let mut by_free: Vec<SparseVec> = vec![Vec::new(); m.cols];
    for row in &r.rows {
        let pivot = row[0].0;
        for &(c, v) in &row[1..] {
            by_free[c].push((pivot, f.neg(v)));
        }
    }
    let basis: Vec<SparseVec> = (0..m.cols)
        .filter(|&c| !is_pivot[c])
        .map(|c| {
            let mut v = std::mem::take(&mut by_free[c]);
            v.push((c, 1));
            v.sort_unstable();
            v
        })
        .collect();
    Subspace::from_rows(f, m.cols, &basis)
}

/// `dim((a + b) / b)`.
pub fn quotient_dim(a: &Subspace, b: &Subspace) -> Result<usize> {
    Ok(a.sum(b)?.dim() - b.dim())
}
