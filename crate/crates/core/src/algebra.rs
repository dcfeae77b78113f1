//! Truncated graded-commutative algebras over F_p.
//!
//! An algebra is presented as a graded tensor product of single-generator
//! algebras (exterior, truncated polynomial, divided power), cut off above a
//! maximal degree `D`. Products that would land above `D` are zero; nothing
//! at or below `D` depends on them. Quotients by homogeneous ideals are built
//! degree by degree and keep a projection back to the parent basis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{Echelon, SparseVec, Subspace};

static NEXT_ALGEBRA_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `g^2 = 0`; requires odd degree.
    Exterior,
    /// `k[x]/(x^e)` with `e >= 2`; requires even degree.
    TruncatedPower(u32),
    /// Basis `u^(i)`, `u^(i) u^(j) = binom(i+j, i) u^(i+j)`; requires even degree.
    DividedPower,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: usize,
    pub kind: GeneratorKind,
}

impl GeneratorSpec {
    pub fn new(name: impl Into<String>, degree: usize, kind: GeneratorKind) -> Self {
        Self {
            name: name.into(),
            degree,
            kind,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidGenerator {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.degree == 0 {
            return bad("degree must be positive");
        }
        match self.kind {
            GeneratorKind::Exterior if self.degree.is_multiple_of(2) => {
                bad("exterior generators must have odd degree")
            }
            GeneratorKind::DividedPower if self.degree % 2 == 1 => {
                bad("divided power generators must have even degree")
            }
            GeneratorKind::TruncatedPower(e) if e < 2 => bad("truncation exponent must be >= 2"),
            GeneratorKind::TruncatedPower(_) if self.degree % 2 == 1 => {
                bad("truncated power generators must have even degree")
            }
            _ => Ok(()),
        }
    }

    // Largest exponent allowed in degree <= max_degree.
    fn max_exponent(&self, max_degree: usize) -> u32 {
        let by_degree = (max_degree / self.degree) as u32;
        match self.kind {
            GeneratorKind::Exterior => by_degree.min(1),
            GeneratorKind::TruncatedPower(e) => by_degree.min(e - 1),
            GeneratorKind::DividedPower => by_degree,
        }
    }
}

/// A presentation: the graded tensor product of the listed generators,
/// truncated at `truncation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraSpec {
    #[serde(rename = "p")]
    pub field: PrimeField,
    pub truncation: usize,
    pub factors: Vec<GeneratorSpec>,
}

pub const PRESET_NAMES: &[&str] = &[
    "thompson-mod-p",
    "divided-power",
    "exterior-pair",
    "truncated-cubic",
    "trivial",
];

impl AlgebraSpec {
    pub fn new(field: PrimeField, truncation: usize, factors: Vec<GeneratorSpec>) -> Self {
        Self {
            field,
            truncation,
            factors,
        }
    }

    /// Λ{α, β} ⊗ Γ(u): two exterior classes in degree 1 and a divided power
    /// generator in degree 2.
    pub fn thompson(field: PrimeField, truncation: usize) -> Self {
        Self::new(
            field,
            truncation,
            vec![
                GeneratorSpec::new("alpha", 1, GeneratorKind::Exterior),
                GeneratorSpec::new("beta", 1, GeneratorKind::Exterior),
                GeneratorSpec::new("u", 2, GeneratorKind::DividedPower),
            ],
        )
    }

    pub fn divided_power(field: PrimeField, truncation: usize) -> Self {
        Self::new(
            field,
            truncation,
            vec![GeneratorSpec::new("u", 2, GeneratorKind::DividedPower)],
        )
    }

    pub fn exterior_pair(field: PrimeField, truncation: usize) -> Self {
        Self::new(
            field,
            truncation,
            vec![
                GeneratorSpec::new("alpha", 1, GeneratorKind::Exterior),
                GeneratorSpec::new("beta", 1, GeneratorKind::Exterior),
            ],
        )
    }

    /// k[x]/(x^3) with x in degree 2.
    pub fn truncated_cubic(field: PrimeField, truncation: usize) -> Self {
        Self::new(
            field,
            truncation,
            vec![GeneratorSpec::new("x", 2, GeneratorKind::TruncatedPower(3))],
        )
    }

    pub fn trivial(field: PrimeField, truncation: usize) -> Self {
        Self::new(field, truncation, Vec::new())
    }

    pub fn preset(name: &str, field: PrimeField, truncation: usize) -> Result<Self> {
        match name {
            "thompson-mod-p" => Ok(Self::thompson(field, truncation)),
            "divided-power" => Ok(Self::divided_power(field, truncation)),
            "exterior-pair" => Ok(Self::exterior_pair(field, truncation)),
            "truncated-cubic" => Ok(Self::truncated_cubic(field, truncation)),
            "trivial" => Ok(Self::trivial(field, truncation)),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset `{other}` (known: {})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.factors {
            g.validate()?;
        }
        Ok(())
    }
}

/// Exponent vector over the factors of the presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
}

/// A homogeneous element: basis index in `degree` -> nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    algebra: u64,
    degree: usize,
    coeffs: BTreeMap<usize, u32>,
}

impl Element {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, index: usize) -> u32 {
        self.coeffs.get(&index).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.coeffs.iter().map(|(&i, &c)| (i, c))
    }

    pub fn to_sparse(&self) -> SparseVec {
        self.terms().collect()
    }
}

/// A presented graded-commutative algebra truncated at degree `D`, with its
/// monomial basis and full product table in degrees `<= D`.
#[derive(Debug, Clone)]
pub struct GradedAlgebra {
    id: u64,
    spec: AlgebraSpec,
    relations: Vec<String>,
    basis: Vec<Vec<Monomial>>,
    index: Vec<HashMap<Monomial, usize>>,
    // products[d1][d2][i * dim(d2) + j] for d1 + d2 <= D
    products: Vec<Vec<Vec<SparseVec>>>,
}

impl PartialEq for GradedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

/// Builds the free presentation described by `spec`.
pub fn build_algebra(spec: &AlgebraSpec) -> Result<GradedAlgebra> {
    spec.validate()?;
    let max = spec.truncation;
    let mut basis: Vec<Vec<Monomial>> = vec![Vec::new(); max + 1];
    let mut exps = Vec::with_capacity(spec.factors.len());
    enumerate_monomials(&spec.factors, max, 0, &mut exps, &mut basis);
    // earlier generators with larger exponents first: alpha before beta
    for bucket in basis.iter_mut() {
        bucket.sort_by(|a, b| b.cmp(a));
    }
    let index = index_of(&basis);

    let products = product_blocks(&basis, |d1, m1, d2, m2| {
        let (coeff, m) = monomial_product(spec, m1, m2);
        if coeff == 0 {
            return Vec::new();
        }
        vec![(index[d1 + d2][&m], coeff)]
    });
    Ok(GradedAlgebra {
        id: NEXT_ALGEBRA_ID.fetch_add(1, Ordering::Relaxed),
        spec: spec.clone(),
        relations: Vec::new(),
        basis,
        index,
        products,
    })
}

fn enumerate_monomials(
    factors: &[GeneratorSpec],
    max: usize,
    used: usize,
    exps: &mut Vec<u32>,
    out: &mut [Vec<Monomial>],
) {
    let t = exps.len();
    if t == factors.len() {
        out[used].push(Monomial {
            exponents: exps.clone(),
        });
        return;
    }
    let g = &factors[t];
    for a in 0..=g.max_exponent(max - used) {
        exps.push(a);
        enumerate_monomials(factors, max, used + a as usize * g.degree, exps, out);
        exps.pop();
    }
}

fn index_of(basis: &[Vec<Monomial>]) -> Vec<HashMap<Monomial, usize>> {
    basis
        .iter()
        .map(|b| b.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect())
        .collect()
}

fn product_blocks<F>(basis: &[Vec<Monomial>], mul: F) -> Vec<Vec<Vec<SparseVec>>>
where
    F: Fn(usize, &Monomial, usize, &Monomial) -> SparseVec + Sync,
{
    let max = basis.len() - 1;
    (0..=max)
        .into_par_iter()
        .map(|d1| {
            (0..=max - d1)
                .map(|d2| {
                    let mut block = Vec::with_capacity(basis[d1].len() * basis[d2].len());
                    for m1 in &basis[d1] {
                        for m2 in &basis[d2] {
                            block.push(mul(d1, m1, d2, m2));
                        }
                    }
                    block
                })
                .collect()
        })
        .collect()
}

// Product of two monomials of the free presentation: (coefficient, monomial).
fn monomial_product(spec: &AlgebraSpec, a: &Monomial, b: &Monomial) -> (u32, Monomial) {
    let f = spec.field;
    // Moving the b-part of factor s past the a-part of each later factor t.
    let mut sign_exp = 0usize;
    let mut a_suffix_deg = 0usize;
    for s in (0..spec.factors.len()).rev() {
        let deg = spec.factors[s].degree;
        sign_exp += b.exponents[s] as usize * deg * a_suffix_deg;
        a_suffix_deg += a.exponents[s] as usize * deg;
    }
    let mut coeff = if sign_exp.is_multiple_of(2) { 1 } else { f.p() - 1 };
    let mut exps = Vec::with_capacity(a.exponents.len());
    for (t, g) in spec.factors.iter().enumerate() {
        let (x, y) = (a.exponents[t], b.exponents[t]);
        let c = match g.kind {
            GeneratorKind::Exterior => u32::from(x + y <= 1),
            GeneratorKind::TruncatedPower(e) => u32::from(x + y < e),
            GeneratorKind::DividedPower => f.binom((x + y) as u64, x as u64),
        };
        coeff = f.mul(coeff, c);
        if coeff == 0 {
            return (0, a.clone());
        }
        exps.push(x + y);
    }
    (coeff, Monomial { exponents: exps })
}

impl GradedAlgebra {
    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn field(&self) -> PrimeField {
        self.spec.field
    }

    pub fn truncation(&self) -> usize {
        self.spec.truncation
    }

    /// Human-readable descriptions of the relations divided out, if any.
    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn dim(&self, degree: usize) -> usize {
        self.basis.get(degree).map_or(0, Vec::len)
    }

    /// `dim R^d` for `0 <= d <= D`.
    pub fn hilbert(&self) -> Vec<usize> {
        self.basis.iter().map(Vec::len).collect()
    }

    pub fn basis(&self, degree: usize) -> &[Monomial] {
        &self.basis[degree]
    }

    pub fn monomial_index(&self, degree: usize, m: &Monomial) -> Option<usize> {
        self.index.get(degree)?.get(m).copied()
    }

    pub fn label(&self, degree: usize, index: usize) -> String {
        MonomialLabel(&self.spec, &self.basis[degree][index]).to_string()
    }

    /// Finds a basis monomial by its printed label, e.g. `"alpha*u^(2)"`.
    pub fn find_basis(&self, label: &str) -> Option<(usize, usize)> {
        (0..self.basis.len()).find_map(|d| {
            (0..self.basis[d].len())
                .find(|&i| self.label(d, i) == label)
                .map(|i| (d, i))
        })
    }

    /// Structure constants of `b_i * b_j` for basis elements in degrees `d1`, `d2`.
    /// Empty when the product vanishes or lands above the truncation.
    #[inline]
    pub fn basis_product(&self, d1: usize, i: usize, d2: usize, j: usize) -> &[(usize, u32)] {
        if d1 + d2 > self.spec.truncation {
            return &[];
        }
        &self.products[d1][d2][i * self.basis[d2].len() + j]
    }

    pub fn one(&self) -> Element {
        self.basis_element(0, 0)
    }

    pub fn zero(&self, degree: usize) -> Element {
        Element {
            algebra: self.id,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis_element(&self, degree: usize, index: usize) -> Element {
        assert!(index < self.dim(degree), "basis index out of range");
        self.element(degree, &[(index, 1)]).unwrap()
    }

    pub fn element(&self, degree: usize, terms: &[(usize, u32)]) -> Result<Element> {
        if degree > self.truncation() {
            return Err(Error::DegreeOutOfRange {
                degree,
                truncation: self.truncation(),
            });
        }
        let f = self.field();
        let mut coeffs = BTreeMap::new();
        for &(i, c) in terms {
            assert!(i < self.dim(degree), "basis index out of range");
            let slot = coeffs.entry(i).or_insert(0);
            *slot = f.add(*slot, f.reduce(c as u64));
        }
        coeffs.retain(|_, c| *c != 0);
        Ok(Element {
            algebra: self.id,
            degree,
            coeffs,
        })
    }

    /// Builds an element from `(degree, index, coefficient)` terms, which must
    /// all share one degree.
    pub fn element_from_terms(&self, terms: &[(usize, usize, u32)]) -> Result<Element> {
        let Some(&(degree, _, _)) = terms.first() else {
            return Err(Error::NonHomogeneous);
        };
        if terms.iter().any(|&(d, _, _)| d != degree) {
            return Err(Error::NonHomogeneous);
        }
        let flat: Vec<(usize, u32)> = terms.iter().map(|&(_, i, c)| (i, c)).collect();
        self.element(degree, &flat)
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        if a.algebra != self.id || b.algebra != self.id {
            return Err(Error::ForeignElement);
        }
        let degree = a.degree + b.degree;
        let mut out = self.zero(degree);
        if degree > self.truncation() {
            return Ok(out);
        }
        let f = self.field();
        for (&i, &x) in &a.coeffs {
            for (&j, &y) in &b.coeffs {
                let xy = f.mul(x, y);
                for &(k, c) in self.basis_product(a.degree, i, b.degree, j) {
                    let slot = out.coeffs.entry(k).or_insert(0);
                    *slot = f.add(*slot, f.mul(xy, c));
                }
            }
        }
        out.coeffs.retain(|_, c| *c != 0);
        Ok(out)
    }
}

/// `a * b` in the algebra both elements belong to.
pub fn multiply(algebra: &GradedAlgebra, a: &Element, b: &Element) -> Result<Element> {
    algebra.multiply(a, b)
}

struct MonomialLabel<'a>(&'a AlgebraSpec, &'a Monomial);

impl fmt::Display for MonomialLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (g, &a) in self.0.factors.iter().zip(&self.1.exponents) {
            if a == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            match (g.kind, a) {
                (GeneratorKind::DividedPower, _) => write!(f, "{}^({a})", g.name)?,
                (_, 1) => f.write_str(&g.name)?,
                _ => write!(f, "{}^{a}", g.name)?,
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// `R/I` for a homogeneous ideal `I`, with the projection `R -> R/I` and the
/// choice of coset representatives.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    pub algebra: GradedAlgebra,
    // projection[d][i]: image of parent basis element i in quotient coordinates
    projection: Vec<Vec<SparseVec>>,
    // lift[d][r]: parent basis index of quotient basis element r
    lift: Vec<Vec<usize>>,
    ideal_dims: Vec<usize>,
}

impl QuotientMap {
    pub fn new(parent: &GradedAlgebra, generators: &[Element]) -> Result<Self> {
        for g in generators {
            if g.algebra != parent.id {
                return Err(Error::ForeignElement);
            }
            if g.degree == 0 {
                return Err(Error::DegreeZeroRelation);
            }
        }
        let f = parent.field();
        let max = parent.truncation();

        // I_d = span{ x * g : x monomial, deg(x) + deg(g) = d }
        let ideals: Vec<Subspace> = (0..=max)
            .into_par_iter()
            .map(|d| {
                let mut e = Echelon::new(f, parent.dim(d));
                for g in generators.iter().filter(|g| g.degree <= d) {
                    let xd = d - g.degree;
                    for x in 0..parent.dim(xd) {
                        let prod = parent
                            .multiply(&parent.basis_element(xd, x), g)
                            .expect("same algebra");
                        e.insert(&prod.to_sparse());
                    }
                }
                e.into_subspace()
            })
            .collect();

        let mut lift = Vec::with_capacity(max + 1);
        let mut projection = Vec::with_capacity(max + 1);
        for (d, ideal) in ideals.iter().enumerate() {
            let pivots = ideal.pivots();
            let reps: Vec<usize> = (0..parent.dim(d))
                .filter(|i| pivots.binary_search(i).is_err())
                .collect();
            let mut renumber = vec![usize::MAX; parent.dim(d)];
            for (r, &i) in reps.iter().enumerate() {
                renumber[i] = r;
            }
            let proj: Vec<SparseVec> = (0..parent.dim(d))
                .map(|i| {
                    let mut v: SparseVec = ideal
                        .reduce(&[(i, 1)])
                        .into_iter()
                        .map(|(c, x)| (renumber[c], x))
                        .collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            lift.push(reps);
            projection.push(proj);
        }

        let basis: Vec<Vec<Monomial>> = lift
            .iter()
            .enumerate()
            .map(|(d, reps)| reps.iter().map(|&i| parent.basis[d][i].clone()).collect())
            .collect();
        let index = index_of(&basis);

        let lift_ref = &lift;
        let proj_ref = &projection;
        let products = product_blocks(&basis, |d1, m1, d2, m2| {
            let i = lift_ref[d1][index[d1][m1]];
            let j = lift_ref[d2][index[d2][m2]];
            let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
            for &(k, c) in parent.basis_product(d1, i, d2, j) {
                for &(r, x) in &proj_ref[d1 + d2][k] {
                    let slot = acc.entry(r).or_insert(0);
                    *slot = f.add(*slot, f.mul(c, x));
                }
            }
            acc.into_iter().filter(|&(_, c)| c != 0).collect()
        });

        let mut relations = parent.relations.clone();
        relations.extend(generators.iter().map(|g| describe(parent, g)));
        let ideal_dims = ideals.iter().map(Subspace::dim).collect();

        Ok(Self {
            algebra: GradedAlgebra {
                id: NEXT_ALGEBRA_ID.fetch_add(1, Ordering::Relaxed),
                spec: parent.spec.clone(),
                relations,
                basis,
                index,
                products,
            },
            projection,
            lift,
            ideal_dims,
        })
    }

    /// Image of parent basis element `(degree, index)` in quotient coordinates.
    pub fn project(&self, degree: usize, index: usize) -> &[(usize, u32)] {
        &self.projection[degree][index]
    }

    /// Parent basis index of the quotient basis element `(degree, rep)`.
    pub fn lift(&self, degree: usize, rep: usize) -> usize {
        self.lift[degree][rep]
    }

    pub fn ideal_dim(&self, degree: usize) -> usize {
        self.ideal_dims[degree]
    }
}

fn describe(a: &GradedAlgebra, e: &Element) -> String {
    let terms: Vec<String> = e
        .terms()
        .map(|(i, c)| {
            if c == 1 {
                a.label(e.degree, i)
            } else {
                format!("{c}*{}", a.label(e.degree, i))
            }
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

pub fn quotient_algebra(parent: &GradedAlgebra, generators: &[Element]) -> Result<GradedAlgebra> {
    Ok(QuotientMap::new(parent, generators)?.algebra)
}

/// Degree -> number of minimal generators, for degrees `1..=D`.
///
/// Only nonzero counts are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorProfile {
    pub truncation: usize,
    pub counts: BTreeMap<usize, usize>,
}

impl GeneratorProfile {
    pub fn count(&self, degree: usize) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Minimal generators of the augmentation ideal `R^{>0}`.
///
/// In each degree `d`, the count is `dim R^d` minus the dimension of the span
/// of all products of two positive-degree elements with degrees summing to `d`.
pub fn ideal_minimal_generators(a: &GradedAlgebra) -> GeneratorProfile {
    let f = a.field();
    let counts: Vec<(usize, usize)> = (1..=a.truncation())
        .into_par_iter()
        .map(|d| {
            let mut e = Echelon::new(f, a.dim(d));
            for d1 in 1..d {
                let d2 = d - d1;
                for i in 0..a.dim(d1) {
                    for j in 0..a.dim(d2) {
                        let prod = a.basis_product(d1, i, d2, j);
                        if !prod.is_empty() {
                            e.insert(prod);
                        }
                    }
                }
            }
            (d, a.dim(d) - e.rank())
        })
        .collect();
    GeneratorProfile {
        truncation: a.truncation(),
        counts: counts.into_iter().filter(|&(_, c)| c > 0).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn gamma(p: u32, d: usize) -> GradedAlgebra {
        build_algebra(&AlgebraSpec::divided_power(f(p), d)).unwrap()
    }

    fn lambda(p: u32, d: usize) -> GradedAlgebra {
        build_algebra(&AlgebraSpec::exterior_pair(f(p), d)).unwrap()
    }

    // deg u^(i) = 2i, index 0 in its degree
    fn u(a: &GradedAlgebra, i: usize) -> Element {
        a.basis_element(2 * i, 0)
    }

    #[test]
    fn divided_power_basis() {
        let a = gamma(3, 8);
        assert_eq!(a.hilbert(), vec![1, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(a.label(6, 0), "u^(3)");
        assert_eq!(a.label(0, 0), "1");
    }

    #[test]
    fn divided_power_products() {
        let a = gamma(3, 8);
        assert!(a.multiply(&u(&a, 1), &u(&a, 2)).unwrap().is_zero());
        let sq = a.multiply(&u(&a, 1), &u(&a, 1)).unwrap();
        assert_eq!(sq, a.element(4, &[(0, 2)]).unwrap());
        // above truncation
        assert!(a.multiply(&u(&a, 4), &u(&a, 1)).unwrap().is_zero());
    }

    #[test]
    fn exterior_relations() {
        for p in [3, 5] {
            let a = lambda(p, 4);
            let alpha = a.basis_element(1, 0);
            let beta = a.basis_element(1, 1);
            assert!(a.multiply(&alpha, &alpha).unwrap().is_zero());
            let ab = a.multiply(&alpha, &beta).unwrap();
            let ba = a.multiply(&beta, &alpha).unwrap();
            assert!(!ab.is_zero());
            let f = a.field();
            for (i, c) in ab.terms() {
                assert_eq!(ba.coeff(i), f.neg(c));
            }
        }
    }

    #[test]
    fn unit_is_identity() {
        let a = build_algebra(&AlgebraSpec::thompson(f(3), 8)).unwrap();
        for d in 0..=8 {
            for i in 0..a.dim(d) {
                let x = a.basis_element(d, i);
                assert_eq!(a.multiply(&a.one(), &x).unwrap(), x);
                assert_eq!(a.multiply(&x, &a.one()).unwrap(), x);
            }
        }
    }

    #[test]
    fn foreign_elements_rejected() {
        let a = gamma(3, 4);
        let b = gamma(3, 4);
        assert_eq!(a.multiply(&a.one(), &b.one()), Err(Error::ForeignElement));
    }

    #[test]
    fn invalid_generators_rejected() {
        let bad = [
            GeneratorSpec::new("x", 2, GeneratorKind::Exterior),
            GeneratorSpec::new("u", 3, GeneratorKind::DividedPower),
            GeneratorSpec::new("y", 2, GeneratorKind::TruncatedPower(1)),
            GeneratorSpec::new("z", 0, GeneratorKind::DividedPower),
        ];
        for g in bad {
            let spec = AlgebraSpec::new(f(3), 4, vec![g]);
            assert!(matches!(
                build_algebra(&spec),
                Err(Error::InvalidGenerator { .. })
            ));
        }
    }

    #[test]
    fn quotient_by_nothing_is_unchanged() {
        let a = build_algebra(&AlgebraSpec::thompson(f(3), 6)).unwrap();
        let q = quotient_algebra(&a, &[]).unwrap();
        assert_eq!(q.hilbert(), a.hilbert());
        for d1 in 0..=6 {
            for d2 in 0..=6 - d1 {
                for i in 0..a.dim(d1) {
                    for j in 0..a.dim(d2) {
                        assert_eq!(q.basis_product(d1, i, d2, j), a.basis_product(d1, i, d2, j));
                    }
                }
            }
        }
    }

    #[test]
    fn quotient_divided_power_by_u1() {
        let a = gamma(3, 12);
        let q = QuotientMap::new(&a, &[u(&a, 1)]).unwrap();
        // explicit span oracle: (u1) in degree 2k is spanned by u1*u^(k-1) = k*u^(k)
        let expected: Vec<usize> = (0..=12)
            .map(|d| {
                if d % 2 == 1 {
                    0
                } else if d == 0 {
                    1
                } else {
                    let k = d / 2;
                    usize::from(k % 3 == 0)
                }
            })
            .collect();
        assert_eq!(q.algebra.hilbert(), expected);
        assert_eq!(q.algebra.dim(2), 0);
        assert_eq!(q.algebra.dim(6), 1);
        assert_eq!(q.algebra.label(6, 0), "u^(3)");
        assert_eq!(q.ideal_dim(4), 1);
    }

    #[test]
    fn quotient_exterior_by_alpha() {
        let a = lambda(3, 4);
        let q = quotient_algebra(&a, &[a.basis_element(1, 0)]).unwrap();
        assert_eq!(q.hilbert(), vec![1, 1, 0, 0, 0]);
        assert_eq!(q.label(1, 0), "beta");
    }

    #[test]
    fn quotient_rejects_bad_relations() {
        let a = lambda(3, 4);
        assert_eq!(
            quotient_algebra(&a, &[a.one()]).unwrap_err(),
            Error::DegreeZeroRelation
        );
        assert_eq!(
            a.element_from_terms(&[(1, 0, 1), (2, 0, 1)]).unwrap_err(),
            Error::NonHomogeneous
        );
    }

    #[test]
    fn profiles() {
        let g = ideal_minimal_generators(&gamma(3, 20));
        assert_eq!(g.counts, BTreeMap::from([(2, 1), (6, 1), (18, 1)]));
        let l = ideal_minimal_generators(&lambda(3, 4));
        assert_eq!(l.counts, BTreeMap::from([(1, 2)]));
        let t = build_algebra(&AlgebraSpec::trivial(f(3), 10)).unwrap();
        assert!(ideal_minimal_generators(&t).counts.is_empty());
        let c = build_algebra(&AlgebraSpec::truncated_cubic(f(5), 12)).unwrap();
        assert_eq!(ideal_minimal_generators(&c).counts, BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn profile_p5_divided_power() {
        let g = ideal_minimal_generators(&gamma(5, 60));
        assert_eq!(g.counts, BTreeMap::from([(2, 1), (10, 1), (50, 1)]));
    }

    #[test]
    fn profile_ignores_factor_order() {
        let spec = AlgebraSpec::thompson(f(3), 20);
        let mut reordered = spec.clone();
        reordered.factors.reverse();
        let a = ideal_minimal_generators(&build_algebra(&spec).unwrap());
        let b = ideal_minimal_generators(&build_algebra(&reordered).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn divided_power_identities() {
        for p in [3u32, 5] {
            let fp = f(p);
            let d = 2 * (p as usize).pow(2) * p as usize;
            let a = gamma(p, d);
            // (u^(1))^k = k! u^(k) for k < p
            let mut acc = a.one();
            let mut fact = 1u32;
            for k in 1..p as usize {
                acc = a.multiply(&acc, &u(&a, 1)).unwrap();
                fact = fp.mul(fact, k as u32);
                assert_eq!(acc, a.element(2 * k, &[(0, fact)]).unwrap());
            }
            // v_i^p = 0 where v_i = u^(p^i), while v_i^(p-1) != 0
            for i in 0..2u32 {
                let v = u(&a, (p as usize).pow(i));
                let mut pw = a.one();
                for k in 1..=p {
                    pw = a.multiply(&pw, &v).unwrap();
                    assert_eq!(pw.is_zero(), k == p, "p={p} i={i} k={k}");
                }
            }
        }
    }

    #[test]
    fn thompson_hilbert_series() {
        let p = 3usize;
        let max = 40;
        let a = build_algebra(&AlgebraSpec::thompson(f(3), max)).unwrap();
        // (1+t)^2 * prod_i (1 + t^{2p^i} + ... + t^{2(p-1)p^i})
        let mut series = vec![0usize; max + 1];
        series[0] = 1;
        let mut step = 2;
        while step <= max {
            let mut next = vec![0; max + 1];
            for (d, &c) in series.iter().enumerate() {
                for k in 0..p {
                    if d + k * step <= max {
                        next[d + k * step] += c;
                    }
                }
            }
            series = next;
            step *= p;
        }
        for _ in 0..2 {
            for d in (1..=max).rev() {
                series[d] += series[d - 1];
            }
        }
        assert_eq!(a.hilbert(), series);
    }

    #[test]
    fn graded_commutativity_exhaustive() {
        for spec in [
            AlgebraSpec::thompson(f(3), 10),
            AlgebraSpec::new(
                f(5),
                9,
                vec![
                    GeneratorSpec::new("a", 3, GeneratorKind::Exterior),
                    GeneratorSpec::new("x", 2, GeneratorKind::TruncatedPower(3)),
                    GeneratorSpec::new("b", 1, GeneratorKind::Exterior),
                ],
            ),
        ] {
            let a = build_algebra(&spec).unwrap();
            let fp = a.field();
            for d1 in 0..=a.truncation() {
                for d2 in 0..=a.truncation() - d1 {
                    for i in 0..a.dim(d1) {
                        for j in 0..a.dim(d2) {
                            let xy = a.basis_product(d1, i, d2, j);
                            let yx = a.basis_product(d2, j, d1, i);
                            let flip = d1 * d2 % 2 == 1;
                            let expected: SparseVec =
                                yx.iter().map(|&(k, c)| (k, fp.signed(c, flip))).collect();
                            assert_eq!(xy, expected.as_slice());
                        }
                    }
                }
            }
        }
    }

    fn arb_element(a: &GradedAlgebra, max_deg: usize) -> impl Strategy<Value = (usize, Vec<u32>)> {
        let dims = a.hilbert();
        let p = a.field().p();
        (0..=max_deg).prop_flat_map(move |d| {
            let n = dims[d];
            (Just(d), prop::collection::vec(0..p, n))
        })
    }

    fn to_element(a: &GradedAlgebra, (d, cs): &(usize, Vec<u32>)) -> Element {
        let terms: Vec<_> = cs.iter().copied().enumerate().collect();
        a.element(*d, &terms).unwrap()
    }

    proptest! {
        #[test]
        fn associativity(
            x in arb_element(&build_algebra(&AlgebraSpec::thompson(PrimeField::new(3).unwrap(), 12)).unwrap(), 4),
            y in arb_element(&build_algebra(&AlgebraSpec::thompson(PrimeField::new(3).unwrap(), 12)).unwrap(), 4),
            z in arb_element(&build_algebra(&AlgebraSpec::thompson(PrimeField::new(3).unwrap(), 12)).unwrap(), 4),
        ) {
            let a = build_algebra(&AlgebraSpec::thompson(f(3), 12)).unwrap();
            let (x, y, z) = (to_element(&a, &x), to_element(&a, &y), to_element(&a, &z));
            let left = a.multiply(&a.multiply(&x, &y).unwrap(), &z).unwrap();
            let right = a.multiply(&x, &a.multiply(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn quotient_is_associative_and_graded(
            x in arb_element(&gamma(3, 14), 6),
            y in arb_element(&gamma(3, 14), 4),
            z in arb_element(&gamma(3, 14), 4),
        ) {
            let a = gamma(3, 14);
            let q = QuotientMap::new(&a, &[u(&a, 1)]).unwrap();
            // push random parent elements through the projection
            let push = |e: &Element| {
                let mut acc = BTreeMap::new();
                for (i, c) in e.terms() {
                    for &(r, x) in q.project(e.degree(), i) {
                        let s = acc.entry(r).or_insert(0u32);
                        *s = a.field().add(*s, a.field().mul(c, x));
                    }
                }
                let terms: Vec<_> = acc.into_iter().collect();
                q.algebra.element(e.degree(), &terms).unwrap()
            };
            let (x, y, z) = (to_element(&a, &x), to_element(&a, &y), to_element(&a, &z));
            let qa = &q.algebra;
            // projection is multiplicative
            prop_assert_eq!(push(&a.multiply(&x, &y).unwrap()), qa.multiply(&push(&x), &push(&y)).unwrap());
            let (px, py, pz) = (push(&x), push(&y), push(&z));
            prop_assert_eq!(
                qa.multiply(&qa.multiply(&px, &py).unwrap(), &pz).unwrap(),
                qa.multiply(&px, &qa.multiply(&py, &pz).unwrap()).unwrap()
            );
        }
    }
}
