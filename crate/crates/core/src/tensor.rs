//! The tensor power `S = R^{⊗p²}` and the signed cyclic rotation σ.
//!
//! A basis word of `S` is a `p²`-tuple of basis elements of `R` (one per
//! slot). Slots are encoded by a global id that orders `R`'s basis by
//! `(degree, index)`, so the lexicographic order on id tuples is the
//! slot-major order used for orbit representatives.
//!
//! σ moves the last slot to the front with the Koszul sign
//! `(-1)^{d_last · (d_total - d_last)}`. Multiplication interleaves slots with
//! the sign `(-1)^{Σ_{i<j} deg(b_i)·deg(a_j)}`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::algebra::GradedAlgebra;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::SparseVec;

/// The cyclic group `⟨σ⟩` acting on `p²` tensor slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicAction {
    field: PrimeField,
    width: usize,
}

impl CyclicAction {
    /// Only `width = p²` is supported: the orbit-size trichotomy 1, p, p²
    /// depends on it.
    pub fn new(field: PrimeField, width: usize) -> Result<Self> {
        let expected = (field.p() as usize).pow(2);
        if width != expected {
            return Err(Error::WidthMismatch { width, expected });
        }
        Ok(Self { field, width })
    }

    pub fn for_field(field: PrimeField) -> Self {
        let p = field.p() as usize;
        Self {
            field,
            width: p * p,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn p(&self) -> usize {
        self.field.p() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Slot {
    pub degree: usize,
    pub index: usize,
}

/// A Künneth basis word: one basis element of `R` per slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TensorWord {
    pub slots: Vec<Slot>,
}

impl TensorWord {
    pub fn degree(&self) -> usize {
        self.slots.iter().map(|s| s.degree).sum()
    }

    pub fn width(&self) -> usize {
        self.slots.len()
    }

    /// Rotates the last slot to the front, with its Koszul sign.
    pub fn rotate(&self) -> SignedWord {
        let m = self.slots.len();
        let last = self.slots[m - 1];
        let mut slots = Vec::with_capacity(m);
        slots.push(last);
        slots.extend_from_slice(&self.slots[..m - 1]);
        let rest = self.degree() - last.degree;
        SignedWord {
            word: TensorWord { slots },
            negative: last.degree * rest % 2 == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedWord {
    pub word: TensorWord,
    pub negative: bool,
}

impl SignedWord {
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }
}

/// Orbit type of a basis word under σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrbitType {
    /// Fixed by σ: `f^{⊗p²}`.
    Fixed,
    /// Fixed by σ^p but not σ: a length-p block repeated p times.
    BlockPeriodic,
    /// Free orbit of size p².
    Free,
}

impl OrbitType {
    pub fn number(self) -> u8 {
        match self {
            OrbitType::Fixed => 1,
            OrbitType::BlockPeriodic => 2,
            OrbitType::Free => 3,
        }
    }

    /// Types 1 and 2 are exactly the classes killed by restriction.
    pub fn in_kernel(self) -> bool {
        self != OrbitType::Free
    }
}

impl Serialize for OrbitType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitClass {
    /// Word index of the lexicographically minimal word in the orbit.
    pub representative: usize,
    pub kind: OrbitType,
    pub size: usize,
}

/// A homogeneous element of `S`: word index -> coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorElement {
    pub degree: usize,
    pub coeffs: BTreeMap<usize, u32>,
}

impl TensorElement {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn word(degree: usize, index: usize) -> Self {
        Self {
            degree,
            coeffs: BTreeMap::from([(index, 1)]),
        }
    }

    pub fn from_sparse(degree: usize, v: &[(usize, u32)]) -> Self {
        Self {
            degree,
            coeffs: v.iter().copied().filter(|&(_, c)| c != 0).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_sparse(&self) -> SparseVec {
        self.coeffs.iter().map(|(&i, &c)| (i, c)).collect()
    }
}

#[derive(Debug, Clone)]
struct Level {
    // n * width slot ids
    words: Vec<u32>,
    lookup: HashMap<Box<[u32]>, u32>,
    // word -> (σ(word) index, negative)
    sigma: Vec<(u32, bool)>,
    orbits: Vec<OrbitClass>,
    // word -> (orbit, negative) with word ≡ ±rep in S_σ
    class_of: Vec<(u32, bool)>,
}

/// `S = R^{⊗p²}` through degree `D`, with σ and orbit data per degree.
#[derive(Debug, Clone)]
pub struct TensorPower {
    algebra: GradedAlgebra,
    action: CyclicAction,
    max_degree: usize,
    // global slot id -> (degree, index)
    slot_of: Vec<Slot>,
    // first global id of each degree
    offsets: Vec<u32>,
    levels: Vec<Level>,
}

/// `dim S^d` for `d <= D` by Künneth convolution of `R`'s Hilbert function.
pub fn kunneth_dims(algebra: &GradedAlgebra, width: usize, max_degree: usize) -> Vec<u128> {
    let h: Vec<u128> = algebra.hilbert().iter().map(|&x| x as u128).collect();
    let mut acc = vec![0u128; max_degree + 1];
    acc[0] = 1;
    for _ in 0..width {
        let mut next = vec![0u128; max_degree + 1];
        for (d, &a) in acc.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (e, &b) in h.iter().enumerate().take(max_degree + 1 - d) {
                next[d + e] += a * b;
            }
        }
        acc = next;
    }
    acc
}

/// Rough resident size in bytes of the tensor data for one degree.
pub fn estimated_level_bytes(dim: u128, width: usize) -> u128 {
    // slot ids twice (flat array + hash keys), hash overhead, σ and class tables
    dim * (8 * width as u128 + 64)
}

impl TensorPower {
    /// Builds `S` for all degrees up to the algebra's truncation.
    pub fn new(algebra: &GradedAlgebra, field: PrimeField) -> Result<Self> {
        Self::up_to(algebra, field, algebra.truncation())
    }

    /// Builds `S` for degrees `0..=max_degree`.
    pub fn up_to(algebra: &GradedAlgebra, field: PrimeField, max_degree: usize) -> Result<Self> {
        if algebra.field() != field {
            return Err(Error::FieldMismatch {
                algebra: algebra.field().p(),
                requested: field.p(),
            });
        }
        if max_degree > algebra.truncation() {
            return Err(Error::DegreeOutOfRange {
                degree: max_degree,
                truncation: algebra.truncation(),
            });
        }
        let action = CyclicAction::for_field(field);
        let mut slot_of = Vec::new();
        let mut offsets = Vec::new();
        for d in 0..=algebra.truncation() {
            offsets.push(slot_of.len() as u32);
            slot_of.extend((0..algebra.dim(d)).map(|index| Slot { degree: d, index }));
        }
        let mut tp = Self {
            algebra: algebra.clone(),
            action,
            max_degree,
            slot_of,
            offsets,
            levels: Vec::new(),
        };
        let levels: Result<Vec<Level>> = (0..=max_degree)
            .into_par_iter()
            .map(|d| tp.build_level(d))
            .collect();
        tp.levels = levels?;
        Ok(tp)
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        &self.algebra
    }

    pub fn action(&self) -> CyclicAction {
        self.action
    }

    pub fn field(&self) -> PrimeField {
        self.action.field
    }

    pub fn width(&self) -> usize {
        self.action.width
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check_degree(&self, d: usize) -> Result<()> {
        if d > self.max_degree {
            return Err(Error::DegreeOutOfRange {
                degree: d,
                truncation: self.max_degree,
            });
        }
        Ok(())
    }

    fn build_level(&self, d: usize) -> Result<Level> {
        let m = self.width();
        let mut words = Vec::new();
        let mut prefix = Vec::with_capacity(m);
        self.enumerate(d, &mut prefix, &mut words);
        let n = words.len() / m;
        let lookup: HashMap<Box<[u32]>, u32> = (0..n)
            .map(|i| (words[i * m..(i + 1) * m].into(), i as u32))
            .collect();

        let mut rotated = vec![0u32; m];
        let sigma: Vec<(u32, bool)> = (0..n)
            .map(|i| {
                let w = &words[i * m..(i + 1) * m];
                rotated[0] = w[m - 1];
                rotated[1..].copy_from_slice(&w[..m - 1]);
                let last = self.slot_of[w[m - 1] as usize].degree;
                (lookup[&rotated[..]], last * (d - last) % 2 == 1)
            })
            .collect();

        let p = self.action.p();
        let mut orbits = Vec::new();
        let mut class_of = vec![(u32::MAX, false); n];
        for start in 0..n {
            if class_of[start].0 != u32::MAX {
                continue;
            }
            let orbit = orbits.len() as u32;
            let (mut cur, mut neg, mut size) = (start, false, 0usize);
            loop {
                class_of[cur] = (orbit, neg);
                size += 1;
                let (next, s) = sigma[cur];
                neg ^= s;
                cur = next as usize;
                if cur == start {
                    break;
                }
            }
            if neg {
                return Err(Error::CheckFailed {
                    degree: d,
                    detail: format!("stabilizer of word {start} acts by -1"),
                });
            }
            let kind = if size == 1 {
                OrbitType::Fixed
            } else if size == p {
                OrbitType::BlockPeriodic
            } else if size == m {
                OrbitType::Free
            } else {
                return Err(Error::CheckFailed {
                    degree: d,
                    detail: format!("orbit of size {size}"),
                });
            };
            orbits.push(OrbitClass {
                representative: start,
                kind,
                size,
            });
        }
        Ok(Level {
            words,
            lookup,
            sigma,
            orbits,
            class_of,
        })
    }

    // Words of total degree `remaining + deg(prefix)` in lexicographic order.
    fn enumerate_rec(&self, remaining: usize, prefix: &mut Vec<u32>, out: &mut Vec<u32>) {
        let m = self.width();
        if prefix.len() == m - 1 {
            if remaining <= self.algebra.truncation() {
                for idx in 0..self.algebra.dim(remaining) {
                    out.extend_from_slice(prefix);
                    out.push(self.offsets[remaining] + idx as u32);
                }
            }
            return;
        }
        for deg in 0..=remaining {
            for idx in 0..self.algebra.dim(deg) {
                prefix.push(self.offsets[deg] + idx as u32);
                self.enumerate_rec(remaining - deg, prefix, out);
                prefix.pop();
            }
        }
    }

    fn enumerate(&self, d: usize, prefix: &mut Vec<u32>, out: &mut Vec<u32>) {
        self.enumerate_rec(d, prefix, out);
    }

    fn level(&self, d: usize) -> &Level {
        &self.levels[d]
    }

    /// `dim S^d`.
    pub fn dim(&self, d: usize) -> usize {
        self.levels
            .get(d)
            .map_or(0, |l| l.words.len() / self.width())
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..=self.max_degree).map(|d| self.dim(d)).collect()
    }

    /// Raw slot ids of word `i` in degree `d`.
    pub fn word_ids(&self, d: usize, i: usize) -> &[u32] {
        let m = self.width();
        &self.level(d).words[i * m..(i + 1) * m]
    }

    pub fn word(&self, d: usize, i: usize) -> TensorWord {
        TensorWord {
            slots: self
                .word_ids(d, i)
                .iter()
                .map(|&g| self.slot_of[g as usize])
                .collect(),
        }
    }

    pub fn slot_id(&self, slot: Slot) -> Option<u32> {
        (slot.degree <= self.algebra.truncation() && slot.index < self.algebra.dim(slot.degree))
            .then(|| self.offsets[slot.degree] + slot.index as u32)
    }

    pub fn slot(&self, id: u32) -> Slot {
        self.slot_of[id as usize]
    }

    pub fn find_ids(&self, d: usize, ids: &[u32]) -> Option<usize> {
        self.levels.get(d)?.lookup.get(ids).map(|&i| i as usize)
    }

    /// Index of a word in its degree, if it is a valid word of width p².
    pub fn find_word(&self, w: &TensorWord) -> Option<usize> {
        if w.width() != self.width() {
            return None;
        }
        let ids: Option<Vec<u32>> = w.slots.iter().map(|&s| self.slot_id(s)).collect();
        self.find_ids(w.degree(), &ids?)
    }

    /// Human-readable word, e.g. `[u^(1), 1, 1, ...]`.
    pub fn word_label(&self, d: usize, i: usize) -> String {
        let parts: Vec<String> = self
            .word_ids(d, i)
            .iter()
            .map(|&g| {
                let s = self.slot_of[g as usize];
                self.algebra.label(s.degree, s.index)
            })
            .collect();
        format!("[{}]", parts.join(", "))
    }

    /// `(σ(w_i) index, negative)`.
    pub fn sigma(&self, d: usize, i: usize) -> (usize, bool) {
        let (j, s) = self.level(d).sigma[i];
        (j as usize, s)
    }

    pub fn sigma_apply(&self, w: &TensorWord) -> Result<SignedWord> {
        if w.width() != self.width() {
            return Err(Error::WidthMismatch {
                width: w.width(),
                expected: self.width(),
            });
        }
        Ok(w.rotate())
    }

    /// σ applied to a linear combination.
    pub fn sigma_element(&self, x: &TensorElement) -> TensorElement {
        let f = self.field();
        let mut out = TensorElement::zero(x.degree);
        for (&i, &c) in &x.coeffs {
            let (j, neg) = self.sigma(x.degree, i);
            out.coeffs.insert(j, f.signed(c, neg));
        }
        out
    }

    pub fn orbits(&self, d: usize) -> &[OrbitClass] {
        &self.level(d).orbits
    }

    /// The σ-orbit classes of degree-`d` words.
    pub fn classify_orbits(&self, d: usize) -> Result<Vec<OrbitClass>> {
        self.check_degree(d)?;
        Ok(self.orbits(d).to_vec())
    }

    /// `(orbit, negative)` such that `w_i ≡ ±rep(orbit)` modulo `im(1 - σ)`.
    pub fn class_of(&self, d: usize, i: usize) -> (usize, bool) {
        let (o, s) = self.level(d).class_of[i];
        (o as usize, s)
    }

    pub fn orbit_counts(&self, d: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for o in self.orbits(d) {
            c[o.kind.number() as usize - 1] += 1;
        }
        c
    }

    /// Signed words `σ^k(rep)` for `k < size`, as `(word index, negative)`.
    pub fn orbit_words(&self, d: usize, orbit: usize) -> Vec<(usize, bool)> {
        let o = self.orbits(d)[orbit];
        let mut out = Vec::with_capacity(o.size);
        let (mut cur, mut neg) = (o.representative, false);
        for _ in 0..o.size {
            out.push((cur, neg));
            let (next, s) = self.sigma(d, cur);
            cur = next;
            neg ^= s;
        }
        out
    }

    /// Product of two words, accumulated into `out` with weight `scale`.
    /// Products above the build degree are dropped.
    pub fn accumulate_word_product(
        &self,
        (da, ia): (usize, usize),
        (db, ib): (usize, usize),
        scale: u32,
        out: &mut BTreeMap<usize, u32>,
    ) {
        let d = da + db;
        if d > self.max_degree || scale == 0 {
            return;
        }
        let f = self.field();
        let a = self.word_ids(da, ia);
        let b = self.word_ids(db, ib);
        let m = self.width();

        // Σ_{i<j} deg(b_i) deg(a_j)
        let mut sign = 0usize;
        let mut a_suffix = 0usize;
        for i in (0..m).rev() {
            sign += self.slot_of[b[i] as usize].degree * a_suffix;
            a_suffix += self.slot_of[a[i] as usize].degree;
        }
        let mut terms: Vec<(Vec<u32>, u32)> = vec![(Vec::with_capacity(m), f.signed(scale, sign % 2 == 1))];
        for i in 0..m {
            let sa = self.slot_of[a[i] as usize];
            let sb = self.slot_of[b[i] as usize];
            let prod = self
                .algebra
                .basis_product(sa.degree, sa.index, sb.degree, sb.index);
            if prod.is_empty() {
                return;
            }
            let off = self.offsets[sa.degree + sb.degree];
            if prod.len() == 1 {
                let (k, c) = prod[0];
                for t in terms.iter_mut() {
                    t.0.push(off + k as u32);
                    t.1 = f.mul(t.1, c);
                }
            } else {
                terms = terms
                    .into_iter()
                    .flat_map(|(ids, c)| {
                        prod.iter().map(move |&(k, x)| {
                            let mut ids = ids.clone();
                            ids.push(off + k as u32);
                            (ids, f.mul(c, x))
                        })
                    })
                    .collect();
            }
        }
        for (ids, c) in terms {
            let idx = self.find_ids(d, &ids).expect("product word exists");
            let slot = out.entry(idx).or_insert(0);
            *slot = f.add(*slot, c);
        }
    }

    /// Multiplication in `S`, bilinear in both arguments.
    pub fn word_multiply(&self, a: &TensorElement, b: &TensorElement) -> TensorElement {
        let f = self.field();
        let mut acc = BTreeMap::new();
        for (&i, &x) in &a.coeffs {
            for (&j, &y) in &b.coeffs {
                self.accumulate_word_product((a.degree, i), (b.degree, j), f.mul(x, y), &mut acc);
            }
        }
        acc.retain(|_, c| *c != 0);
        TensorElement {
            degree: a.degree + b.degree,
            coeffs: acc,
        }
    }

    /// Word-level product with width checking.
    pub fn multiply_words(&self, a: &TensorWord, b: &TensorWord) -> Result<TensorElement> {
        let expected = self.width();
        for w in [a, b] {
            if w.width() != expected {
                return Err(Error::WidthMismatch {
                    width: w.width(),
                    expected,
                });
            }
        }
        let ia = self.find_word(a).ok_or(Error::DegreeOutOfRange {
            degree: a.degree(),
            truncation: self.max_degree,
        })?;
        let ib = self.find_word(b).ok_or(Error::DegreeOutOfRange {
            degree: b.degree(),
            truncation: self.max_degree,
        })?;
        Ok(self.word_multiply(
            &TensorElement::word(a.degree(), ia),
            &TensorElement::word(b.degree(), ib),
        ))
    }
}

/// Basis of `S^d` for each `d`, as words.
pub fn tensor_power(tp: &TensorPower) -> Vec<Vec<TensorWord>> {
    (0..=tp.max_degree())
        .map(|d| (0..tp.dim(d)).map(|i| tp.word(d, i)).collect())
        .collect()
}
