//! Cohomology of the infinite cyclic group `C = ⟨σ⟩` with coefficients in
//! `S`, and restriction to the index-p² subgroup `⟨σ^{p²}⟩`.
//!
//! In the collapsed two-column model `H*(X, k) ≅ S^σ ⊕ S_σ`:
//! `H⁰ = S^σ = ker(1 - σ)` and `H¹ = S_σ = S / im(1 - σ)`. Since σ^{p²} acts
//! trivially on `S`, restriction on `H¹` is the norm
//! `w̄ ↦ Σ_{i<p²} σ^i(w)` into `S` itself. Coinvariant classes are written in
//! the basis of orbit representatives.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Element, GradedAlgebra, QuotientMap};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{nullspace, quotient_dim, Echelon, SparseMatrix, SparseVec, Subspace};
use crate::tensor::{OrbitType, TensorElement, TensorPower};

/// `S^σ` in one degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantSpace {
    pub degree: usize,
    /// Reduced echelon basis; row `k` is the signed orbit sum of orbit `k`.
    pub basis: Subspace,
}

impl InvariantSpace {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn element(&self, k: usize) -> TensorElement {
        TensorElement::from_sparse(self.degree, &self.basis.rows()[k])
    }
}

/// `S_σ` in one degree: orbit representatives and `im(1 - σ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinvariantSpace {
    pub degree: usize,
    /// Word index of each orbit representative; class `k` is `rep_k` mod `im(1 - σ)`.
    pub representatives: Vec<usize>,
    pub image: Subspace,
}

impl CoinvariantSpace {
    pub fn dim(&self) -> usize {
        self.representatives.len()
    }
}

/// A class in `S_σ`, in orbit-representative coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinvariantClass {
    pub degree: usize,
    pub coords: SparseVec,
}

impl CoinvariantClass {
    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn orbit(degree: usize, orbit: usize) -> Self {
        Self {
            degree,
            coords: vec![(orbit, 1)],
        }
    }
}

/// Matrix of the norm `Σ_{i<p²} σ^i` on `S^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormOperator {
    pub degree: usize,
    pub matrix: SparseMatrix,
}

/// Matrix of σ on `S^d` acting on coefficient columns.
pub fn sigma_matrix(tp: &TensorPower, d: usize) -> SparseMatrix {
    let f = tp.field();
    SparseMatrix::from_triplets(
        f,
        tp.dim(d),
        tp.dim(d),
        (0..tp.dim(d)).map(|i| {
            let (j, neg) = tp.sigma(d, i);
            (j, i, f.signed(1, neg))
        }),
    )
}

// Σ_{i<p²} σ^i(w) by walking the rotation.
fn norm_of_word(tp: &TensorPower, d: usize, w: usize) -> SparseVec {
    let f = tp.field();
    let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
    let (mut cur, mut neg) = (w, false);
    for _ in 0..tp.width() {
        let slot = acc.entry(cur).or_insert(0);
        *slot = f.add(*slot, f.signed(1, neg));
        let (next, s) = tp.sigma(d, cur);
        cur = next;
        neg ^= s;
    }
    acc.into_iter().filter(|&(_, c)| c != 0).collect()
}

pub fn norm_operator(tp: &TensorPower, d: usize) -> Result<NormOperator> {
    check_degree(tp, d)?;
    let columns: Vec<SparseVec> = (0..tp.dim(d)).map(|w| norm_of_word(tp, d, w)).collect();
    Ok(NormOperator {
        degree: d,
        matrix: SparseMatrix::from_columns(tp.field(), tp.dim(d), &columns),
    })
}

fn check_degree(tp: &TensorPower, d: usize) -> Result<()> {
    if d > tp.max_degree() {
        return Err(Error::DegreeOutOfRange {
            degree: d,
            truncation: tp.max_degree(),
        });
    }
    Ok(())
}

/// `S^σ_d`, spanned by the signed orbit sums (one per orbit).
pub fn invariants(tp: &TensorPower, d: usize) -> Result<InvariantSpace> {
    check_degree(tp, d)?;
    let f = tp.field();
    let rows: Vec<SparseVec> = (0..tp.orbits(d).len())
        .map(|k| {
            let mut v: SparseVec = tp
                .orbit_words(d, k)
                .into_iter()
                .map(|(w, neg)| (w, f.signed(1, neg)))
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    // Orbits are disjoint and each starts at its minimal word with coefficient 1.
    Ok(InvariantSpace {
        degree: d,
        basis: Subspace::from_rref_rows(f, tp.dim(d), rows),
    })
}

/// `im(1 - σ)` on `S^d`, in reduced echelon form.
///
/// On an orbit with words `j_0 < … < j_last` this is the hyperplane
/// `Σ c_j x_j = 0`, where `w_j ≡ c_j · rep`.
pub fn image_one_minus_sigma(tp: &TensorPower, d: usize) -> Result<Subspace> {
    check_degree(tp, d)?;
    let f = tp.field();
    let mut rows = Vec::with_capacity(tp.dim(d));
    for k in 0..tp.orbits(d).len() {
        let mut words = tp.orbit_words(d, k);
        words.sort_unstable();
        let (last, last_neg) = *words.last().unwrap();
        for &(w, neg) in &words[..words.len() - 1] {
            // e_w - c_w c_last e_last
            rows.push(vec![(w, 1), (last, f.signed(f.p() - 1, neg ^ last_neg))]);
        }
    }
    rows.sort_unstable_by_key(|r| r[0].0);
    Ok(Subspace::from_rref_rows(f, tp.dim(d), rows))
}

pub fn coinvariants(tp: &TensorPower, d: usize) -> Result<CoinvariantSpace> {
    Ok(CoinvariantSpace {
        degree: d,
        representatives: tp.orbits(d).iter().map(|o| o.representative).collect(),
        image: image_one_minus_sigma(tp, d)?,
    })
}

/// Image of an element of `S` in `S_σ`.
pub fn project_to_coinvariants(tp: &TensorPower, x: &TensorElement) -> CoinvariantClass {
    let f = tp.field();
    let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
    for (&w, &c) in &x.coeffs {
        let (o, neg) = tp.class_of(x.degree, w);
        let slot = acc.entry(o).or_insert(0);
        *slot = f.add(*slot, f.signed(c, neg));
    }
    CoinvariantClass {
        degree: x.degree,
        coords: acc.into_iter().filter(|&(_, c)| c != 0).collect(),
    }
}

/// The chosen lift of a class: `Σ t_k rep_k`.
pub fn representative(tp: &TensorPower, t: &CoinvariantClass) -> TensorElement {
    let reps = tp.orbits(t.degree);
    TensorElement {
        degree: t.degree,
        coeffs: t
            .coords
            .iter()
            .map(|&(k, c)| (reps[k].representative, c))
            .collect(),
    }
}

/// Restriction `S_σ → S`, columns indexed by orbit classes.
///
/// Also checks that the norm is constant (up to the class sign) on every
/// orbit, i.e. that it vanishes on `im(1 - σ)`.
pub fn restriction_map(tp: &TensorPower, d: usize) -> Result<SparseMatrix> {
    check_degree(tp, d)?;
    let f = tp.field();
    let orbits = tp.orbits(d);
    let columns: Vec<SparseVec> = orbits
        .iter()
        .map(|o| norm_of_word(tp, d, o.representative))
        .collect();
    for (k, col) in columns.iter().enumerate() {
        for (w, neg) in tp.orbit_words(d, k).into_iter().skip(1) {
            let expected: SparseVec = col.iter().map(|&(i, c)| (i, f.signed(c, neg))).collect();
            if norm_of_word(tp, d, w) != expected {
                return Err(Error::CheckFailed {
                    degree: d,
                    detail: format!("norm not constant on orbit {k}"),
                });
            }
        }
    }
    Ok(SparseMatrix::from_columns(f, tp.dim(d), &columns))
}

/// Span of the type-1 and type-2 classes in `S_σ,d`.
pub fn kernel_type_span(tp: &TensorPower, d: usize) -> Subspace {
    let orbits = tp.orbits(d);
    Subspace::spanned_by_units(
        tp.field(),
        orbits.len(),
        orbits
            .iter()
            .enumerate()
            .filter(|(_, o)| o.kind.in_kernel())
            .map(|(k, _)| k),
    )
}

fn type_span(tp: &TensorPower, d: usize, kind: OrbitType) -> Subspace {
    let orbits = tp.orbits(d);
    Subspace::spanned_by_units(
        tp.field(),
        orbits.len(),
        orbits
            .iter()
            .enumerate()
            .filter(|(_, o)| o.kind == kind)
            .map(|(k, _)| k),
    )
}

/// `ker(res)` in `S_σ,d`, computed as a nullspace and required to equal the
/// span of type-1 and type-2 classes.
pub fn kernel_basis(tp: &TensorPower, d: usize) -> Result<Subspace> {
    let linear = nullspace(&restriction_map(tp, d)?);
    let combinatorial = kernel_type_span(tp, d);
    if linear != combinatorial {
        return Err(Error::KernelMismatch {
            degree: d,
            linear: linear.dim(),
            combinatorial: combinatorial.dim(),
        });
    }
    Ok(linear)
}

/// Cup product `H⁰ ⊗ H¹ → H¹`: `s ⊗ t̄ ↦ \overline{s · t}`.
pub fn cup_h0_h1(
    tp: &TensorPower,
    s: &TensorElement,
    t: &CoinvariantClass,
) -> Result<CoinvariantClass> {
    let degree = s.degree + t.degree;
    check_degree(tp, degree)?;
    if tp.sigma_element(s) != *s {
        return Err(Error::NotInvariant);
    }
    Ok(cup_unchecked(tp, s, t))
}

fn cup_unchecked(tp: &TensorPower, s: &TensorElement, t: &CoinvariantClass) -> CoinvariantClass {
    let product = tp.word_multiply(s, &representative(tp, t));
    project_to_coinvariants(tp, &product)
}

/// An element of the two-column model `S^σ ⊕ S_σ`, bigraded by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelElement {
    /// Column 0: an invariant of `S`.
    H0(TensorElement),
    /// Column 1: a coinvariant class.
    H1(CoinvariantClass),
    /// Column ≥ 2, which vanishes for `C = ℤ`.
    Zero,
}

/// Cup product `H¹ ⊗ H¹ → H²`; `H²(C, -) = 0`.
pub fn cup_h1_h1(_t1: &CoinvariantClass, _t2: &CoinvariantClass) -> ModelElement {
    ModelElement::Zero
}

/// Full product in the two-column model. Columns add; products landing in
/// column 2 vanish. `H¹ · H⁰` uses graded commutativity with total degree
/// (internal degree + column).
pub fn model_product(tp: &TensorPower, a: &ModelElement, b: &ModelElement) -> Result<ModelElement> {
    use ModelElement::*;
    match (a, b) {
        (Zero, _) | (_, Zero) => Ok(Zero),
        (H0(x), H0(y)) => {
            let degree = x.degree + y.degree;
            check_degree(tp, degree)?;
            for e in [x, y] {
                if tp.sigma_element(e) != *e {
                    return Err(Error::NotInvariant);
                }
            }
            Ok(H0(tp.word_multiply(x, y)))
        }
        (H0(s), H1(t)) => Ok(H1(cup_h0_h1(tp, s, t)?)),
        (H1(t), H0(s)) => {
            let mut c = cup_h0_h1(tp, s, t)?;
            let f = tp.field();
            let negative = (t.degree + 1) * s.degree % 2 == 1;
            for e in c.coords.iter_mut() {
                e.1 = f.signed(e.1, negative);
            }
            Ok(H1(c))
        }
        (H1(t1), H1(t2)) => Ok(cup_h1_h1(t1, t2)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitCounts {
    pub type1: usize,
    pub type2: usize,
    pub type3: usize,
}

/// One report row of the tensor-kernel computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelRow {
    pub degree: usize,
    #[serde(rename = "dim_S")]
    pub dim_s: usize,
    pub orbit_counts: OrbitCounts,
    pub dim_invariants: usize,
    pub dim_coinvariants: usize,
    pub dim_kernel: usize,
    pub min_generators: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelProfile {
    pub rows: Vec<KernelRow>,
}

impl KernelProfile {
    /// Degree -> nonzero minimal generator count.
    pub fn generators(&self) -> BTreeMap<usize, usize> {
        self.rows
            .iter()
            .filter(|r| r.min_generators > 0)
            .map(|r| (r.degree, r.min_generators))
            .collect()
    }

    pub fn row(&self, degree: usize) -> Option<&KernelRow> {
        self.rows.iter().find(|r| r.degree == degree)
    }
}

/// Minimal generators of `ker(res) ⊆ S_σ` as an `S^σ`-module, degree by
/// degree through the build degree of `tp`.
///
/// In degree `d` the count is
/// `dim ker_d - dim Σ_{0<a≤d} S^σ_a · ker_{d-a}` (graded Nakayama).
pub fn kernel_generator_profile(tp: &TensorPower) -> Result<KernelProfile> {
    let max = tp.max_degree();
    let f = tp.field();

    struct Level {
        invariants: InvariantSpace,
        kernel: Subspace,
        dim_coinvariants: usize,
    }
    let levels: Vec<Level> = (0..=max)
        .into_par_iter()
        .map(|d| {
            let invariants = invariants(tp, d)?;
            let kernel = kernel_basis(tp, d)?;
            let dim_coinvariants = tp.dim(d) - image_one_minus_sigma(tp, d)?.dim();
            Ok(Level {
                invariants,
                kernel,
                dim_coinvariants,
            })
        })
        .collect::<Result<_>>()?;

    let rows: Vec<KernelRow> = (0..=max)
        .into_par_iter()
        .map(|d| {
            let kernel = &levels[d].kernel;
            let mut span = Echelon::new(f, kernel.ambient());
            for a in 1..=d {
                let lower = &levels[d - a].kernel;
                if lower.dim() == 0 {
                    continue;
                }
                let inv = &levels[a].invariants;
                for k in 0..inv.dim() {
                    let s = inv.element(k);
                    for row in lower.rows() {
                        let t = CoinvariantClass {
                            degree: d - a,
                            coords: row.clone(),
                        };
                        span.insert(&cup_unchecked(tp, &s, &t).coords);
                    }
                }
            }
            let products = span.into_subspace();
            if !products.is_subspace_of(kernel)? {
                return Err(Error::CheckFailed {
                    degree: d,
                    detail: "S^σ · ker(res) left the kernel".into(),
                });
            }
            let [type1, type2, type3] = tp.orbit_counts(d);
            Ok(KernelRow {
                degree: d,
                dim_s: tp.dim(d),
                orbit_counts: OrbitCounts {
                    type1,
                    type2,
                    type3,
                },
                dim_invariants: levels[d].invariants.dim(),
                dim_coinvariants: levels[d].dim_coinvariants,
                dim_kernel: kernel.dim(),
                min_generators: quotient_dim(kernel, &products)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(KernelProfile { rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneModuleRow {
    pub degree: usize,
    /// `dim (S^σ · 1̄)_d`.
    pub dim_submodule: usize,
    pub dim_type1: usize,
    pub dim_type2: usize,
    pub intersection_with_type2: usize,
    pub equals_type1_span: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneModuleReport {
    pub rows: Vec<OneModuleRow>,
    pub passed: bool,
}

/// The `S^σ`-submodule generated by `1̄ = \overline{1^{⊗p²}}`, compared
/// against the type-1 and type-2 spans in each degree.
pub fn one_module_check(tp: &TensorPower) -> Result<OneModuleReport> {
    let unit = CoinvariantClass::orbit(0, 0);
    let rows: Vec<OneModuleRow> = (0..=tp.max_degree())
        .into_par_iter()
        .map(|d| {
            let inv = invariants(tp, d)?;
            let mut span = Echelon::new(tp.field(), tp.orbits(d).len());
            for k in 0..inv.dim() {
                span.insert(&cup_unchecked(tp, &inv.element(k), &unit).coords);
            }
            let submodule = span.into_subspace();
            let type1 = type_span(tp, d, OrbitType::Fixed);
            let type2 = type_span(tp, d, OrbitType::BlockPeriodic);
            Ok(OneModuleRow {
                degree: d,
                dim_submodule: submodule.dim(),
                dim_type1: type1.dim(),
                dim_type2: type2.dim(),
                intersection_with_type2: submodule.intersection_dim(&type2)?,
                equals_type1_span: submodule == type1,
            })
        })
        .collect::<Result<_>>()?;
    let passed = rows
        .iter()
        .all(|r| r.intersection_with_type2 == 0 && r.equals_type1_span);
    Ok(OneModuleReport { rows, passed })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurjectivityRow {
    pub degree: usize,
    pub dim_kernel_source: usize,
    pub dim_kernel_target: usize,
    pub rank_of_image: usize,
    pub surjective: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurjectivityReport {
    pub relations: Vec<String>,
    pub rows: Vec<SurjectivityRow>,
    pub passed: bool,
}

// π: S → S' on one word, slot by slot.
fn project_word(
    source: &TensorPower,
    target: &TensorPower,
    q: &QuotientMap,
    d: usize,
    w: usize,
) -> TensorElement {
    let f = source.field();
    let mut terms: Vec<(Vec<u32>, u32)> = vec![(Vec::new(), 1)];
    for &id in source.word_ids(d, w) {
        let s = source.slot(id);
        let image = q.project(s.degree, s.index);
        terms = terms
            .into_iter()
            .flat_map(|(ids, c)| {
                image.iter().map(move |&(r, x)| {
                    let mut ids = ids.clone();
                    let slot = crate::tensor::Slot {
                        degree: s.degree,
                        index: r,
                    };
                    ids.push(target.slot_id(slot).expect("quotient slot"));
                    (ids, f.mul(c, x))
                })
            })
            .collect();
    }
    let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
    for (ids, c) in terms {
        let idx = target.find_ids(d, &ids).expect("projected word exists");
        let slot = acc.entry(idx).or_insert(0);
        *slot = f.add(*slot, c);
    }
    acc.retain(|_, c| *c != 0);
    TensorElement { degree: d, coeffs: acc }
}

/// Checks that `π_σ : ker(res)_S → ker(res)_{S'}` is onto for `R' = R/I`,
/// lifting each type-1/type-2 class of `S'` slot by slot.
pub fn surjectivity_check(
    algebra: &GradedAlgebra,
    relations: &[Element],
    max_degree: usize,
) -> Result<SurjectivityReport> {
    let f: PrimeField = algebra.field();
    let q = QuotientMap::new(algebra, relations)?;
    let source = TensorPower::up_to(algebra, f, max_degree)?;
    let target = TensorPower::up_to(&q.algebra, f, max_degree)?;

    let rows: Vec<SurjectivityRow> = (0..=max_degree)
        .into_par_iter()
        .map(|d| {
            let mut image = Echelon::new(f, target.orbits(d).len());
            for o in target.orbits(d).iter().filter(|o| o.kind.in_kernel()) {
                let lifted: Vec<u32> = target
                    .word_ids(d, o.representative)
                    .iter()
                    .map(|&id| {
                        let s = target.slot(id);
                        let parent = crate::tensor::Slot {
                            degree: s.degree,
                            index: q.lift(s.degree, s.index),
                        };
                        source.slot_id(parent).expect("parent slot")
                    })
                    .collect();
                let w = source.find_ids(d, &lifted).expect("lifted word exists");
                let (orbit, neg) = source.class_of(d, w);
                if !source.orbits(d)[orbit].kind.in_kernel() {
                    return Err(Error::CheckFailed {
                        degree: d,
                        detail: format!("lift of {} is not in ker(res)", target.word_label(d, o.representative)),
                    });
                }
                // π_σ(w̄) = ±π_σ(\overline{rep}), computed on the source representative.
                let rep = source.orbits(d)[orbit].representative;
                let projected = project_word(&source, &target, &q, d, rep);
                let mut class = project_to_coinvariants(&target, &projected);
                for e in class.coords.iter_mut() {
                    e.1 = f.signed(e.1, neg);
                }
                image.insert(&class.coords);
            }
            let target_kernel = kernel_type_span(&target, d);
            let rank = image.rank();
            let image = image.into_subspace();
            Ok(SurjectivityRow {
                degree: d,
                dim_kernel_source: kernel_type_span(&source, d).dim(),
                dim_kernel_target: target_kernel.dim(),
                rank_of_image: rank,
                surjective: image == target_kernel,
            })
        })
        .collect::<Result<_>>()?;
    let passed = rows.iter().all(|r| r.surjective);
    Ok(SurjectivityReport {
        relations: q.algebra.relations().to_vec(),
        rows,
        passed,
    })
}
