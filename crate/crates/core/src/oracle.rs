//! Brute-force recomputation of the kernel profile directly in the word
//! basis of `S`, without orbit types or representative coordinates.
//!
//! σ is rebuilt from [`TensorWord::rotate`], invariants are `ker(1 - σ)`,
//! the kernel of restriction is `ker N / im(1 - σ)` with `N = Σ σ^i`, and
//! word products are recomputed slot by slot from the algebra table.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{nullspace, row_space, Echelon, SparseMatrix, SparseVec, Subspace};
use crate::restriction::{kernel_generator_profile, KernelProfile};
use crate::tensor::{TensorPower, TensorWord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleRow {
    pub degree: usize,
    #[serde(rename = "dim_S")]
    pub dim_s: usize,
    pub dim_invariants: usize,
    pub dim_coinvariants: usize,
    pub dim_kernel: usize,
    pub min_generators: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub degree: usize,
    pub quantity: String,
    pub fast: usize,
    pub oracle: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    pub mismatches: Vec<Mismatch>,
    pub agree: bool,
}

fn sigma_by_rotation(tp: &TensorPower, d: usize) -> Result<SparseMatrix> {
    let f = tp.field();
    let mut triplets = Vec::with_capacity(tp.dim(d));
    for i in 0..tp.dim(d) {
        let rotated = tp.word(d, i).rotate();
        let j = tp.find_word(&rotated.word).ok_or_else(|| Error::CheckFailed {
            degree: d,
            detail: format!("rotation of {} left the basis", tp.word_label(d, i)),
        })?;
        triplets.push((j, i, f.signed(1, rotated.negative)));
    }
    Ok(SparseMatrix::from_triplets(f, tp.dim(d), tp.dim(d), triplets))
}

fn multiply_words(tp: &TensorPower, a: &TensorWord, b: &TensorWord, scale: u32, acc: &mut BTreeMap<usize, u32>) {
    let f = tp.field();
    let alg = tp.algebra();
    // (a_1 ⊗ … ⊗ a_m)(b_1 ⊗ … ⊗ b_m): moving b_i past a_j for i < j
    let mut exponent = 0;
    for i in 0..b.slots.len() {
        for j in i + 1..a.slots.len() {
            exponent += b.slots[i].degree * a.slots[j].degree;
        }
    }
    let mut terms: Vec<(Vec<crate::tensor::Slot>, u32)> =
        vec![(Vec::new(), f.signed(scale, exponent % 2 == 1))];
    for (x, y) in a.slots.iter().zip(&b.slots) {
        let degree = x.degree + y.degree;
        let product = if degree > alg.truncation() {
            &[][..]
        } else {
            alg.basis_product(x.degree, x.index, y.degree, y.index)
        };
        terms = terms
            .into_iter()
            .flat_map(|(slots, c)| {
                product.iter().map(move |&(index, v)| {
                    let mut slots = slots.clone();
                    slots.push(crate::tensor::Slot { degree, index });
                    (slots, f.mul(c, v))
                })
            })
            .collect();
        if terms.is_empty() {
            return;
        }
    }
    for (slots, c) in terms {
        let w = TensorWord { slots };
        if let Some(idx) = tp.find_word(&w) {
            let e = acc.entry(idx).or_insert(0);
            *e = f.add(*e, c);
        }
    }
}

fn multiply(tp: &TensorPower, da: usize, x: &SparseVec, db: usize, y: &SparseVec) -> SparseVec {
    let f = tp.field();
    let mut acc = BTreeMap::new();
    for &(i, c) in x {
        let a = tp.word(da, i);
        for &(j, e) in y {
            multiply_words(tp, &a, &tp.word(db, j), f.mul(c, e), &mut acc);
        }
    }
    acc.into_iter().filter(|&(_, c)| c != 0).collect()
}

struct Level {
    invariants: Subspace,
    image: Subspace,
    norm_kernel: Subspace,
    /// Kernel vectors independent modulo `im(1 - σ)`.
    kernel_reps: Vec<SparseVec>,
}

fn level(tp: &TensorPower, d: usize) -> Result<Level> {
    let f = tp.field();
    let n = tp.dim(d);
    let sigma = sigma_by_rotation(tp, d)?;
    let one_minus = SparseMatrix::identity(f, n).sub(&sigma);
    let invariants = nullspace(&one_minus);
    let image = row_space(&one_minus.transpose());
    let mut power = SparseMatrix::identity(f, n);
    let mut norm = power.clone();
    for _ in 1..tp.width() {
        power = power.mul(&sigma);
        norm = norm.add(&power);
    }
    if !power.mul(&sigma).eq(&SparseMatrix::identity(f, n)) {
        return Err(Error::CheckFailed {
            degree: d,
            detail: "σ^{p²} is not the identity".into(),
        });
    }
    let norm_kernel = nullspace(&norm);
    if !image.is_subspace_of(&norm_kernel)? {
        return Err(Error::CheckFailed {
            degree: d,
            detail: "N does not vanish on im(1 - σ)".into(),
        });
    }
    let mut ech = Echelon::from_subspace(&image);
    let kernel_reps = norm_kernel
        .rows()
        .iter()
        .filter(|v| ech.insert(v).is_some())
        .cloned()
        .collect();
    Ok(Level {
        invariants,
        image,
        norm_kernel,
        kernel_reps,
    })
}

/// Kernel profile computed in word coordinates.
pub fn oracle_profile(tp: &TensorPower) -> Result<Vec<OracleRow>> {
    let levels: Vec<Level> = (0..=tp.max_degree())
        .into_par_iter()
        .map(|d| level(tp, d))
        .collect::<Result<_>>()?;
    (0..=tp.max_degree())
        .into_par_iter()
        .map(|d| {
            let lv = &levels[d];
            let mut span = Echelon::from_subspace(&lv.image);
            for a in 1..=d {
                let reps = &levels[d - a].kernel_reps;
                if reps.is_empty() {
                    continue;
                }
                for s in levels[a].invariants.rows() {
                    for r in reps {
                        let product = multiply(tp, a, s, d - a, r);
                        if !lv.norm_kernel.contains(&product) {
                            return Err(Error::CheckFailed {
                                degree: d,
                                detail: "invariant times kernel left ker N".into(),
                            });
                        }
                        span.insert(&product);
                    }
                }
            }
            let dim_kernel = lv.kernel_reps.len();
            Ok(OracleRow {
                degree: d,
                dim_s: tp.dim(d),
                dim_invariants: lv.invariants.dim(),
                dim_coinvariants: tp.dim(d) - lv.image.dim(),
                dim_kernel,
                min_generators: dim_kernel - (span.rank() - lv.image.dim()),
            })
        })
        .collect()
}

/// Degree-by-degree differences between a fast profile and oracle rows.
pub fn compare(fast: &KernelProfile, oracle: &[OracleRow]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for (a, b) in fast.rows.iter().zip(oracle) {
        let pairs = [
            ("dim_S", a.dim_s, b.dim_s),
            ("dim_invariants", a.dim_invariants, b.dim_invariants),
            ("dim_coinvariants", a.dim_coinvariants, b.dim_coinvariants),
            ("dim_kernel", a.dim_kernel, b.dim_kernel),
            (
                "type1_plus_type2",
                a.orbit_counts.type1 + a.orbit_counts.type2,
                b.dim_kernel,
            ),
            ("min_generators", a.min_generators, b.min_generators),
        ];
        for (quantity, fast, oracle) in pairs {
            if fast != oracle {
                out.push(Mismatch {
                    degree: a.degree,
                    quantity: quantity.to_string(),
                    fast,
                    oracle,
                });
            }
        }
    }
    if fast.rows.len() != oracle.len() {
        out.push(Mismatch {
            degree: fast.rows.len().min(oracle.len()),
            quantity: "row_count".into(),
            fast: fast.rows.len(),
            oracle: oracle.len(),
        });
    }
    out
}

/// Runs both pipelines and reports disagreements.
pub fn run_oracle(tp: &TensorPower) -> Result<OracleReport> {
    let fast = kernel_generator_profile(tp)?;
    let rows = oracle_profile(tp)?;
    let mismatches = compare(&fast, &rows);
    Ok(OracleReport {
        agree: mismatches.is_empty(),
        rows,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_algebra, AlgebraSpec};
    use crate::field::PrimeField;
    use crate::restriction::sigma_matrix;

    fn tp(spec: AlgebraSpec) -> TensorPower {
        let a = build_algebra(&spec).unwrap();
        TensorPower::new(&a, a.field()).unwrap()
    }

    fn f3() -> PrimeField {
        PrimeField::new(3).unwrap()
    }

    #[test]
    fn rotation_matrix_agrees_with_cached_sigma() {
        let t = tp(AlgebraSpec::thompson(f3(), 4));
        for d in 0..=4 {
            assert_eq!(sigma_by_rotation(&t, d).unwrap(), sigma_matrix(&t, d));
        }
    }

    #[test]
    fn slot_products_agree_with_fast_path() {
        let t = tp(AlgebraSpec::thompson(f3(), 4));
        for da in 0..=2 {
            for db in 0..=2 {
                for i in 0..t.dim(da) {
                    for j in 0..t.dim(db) {
                        let fast = t.word_multiply(
                            &crate::tensor::TensorElement::word(da, i),
                            &crate::tensor::TensorElement::word(db, j),
                        );
                        assert_eq!(multiply(&t, da, &vec![(i, 1)], db, &vec![(j, 1)]), fast.to_sparse());
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_agrees() {
        let report = run_oracle(&tp(AlgebraSpec::divided_power(f3(), 8))).unwrap();
        assert!(report.agree, "{:?}", report.mismatches);
        let kernel: Vec<usize> = report.rows.iter().map(|r| r.dim_kernel).collect();
        assert_eq!(kernel, vec![1, 0, 0, 0, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn trivial_agrees() {
        let report = run_oracle(&tp(AlgebraSpec::trivial(f3(), 3))).unwrap();
        assert!(report.agree);
        assert_eq!(report.rows[0].dim_kernel, 1);
        assert!(report.rows[1..].iter().all(|r| r.dim_s == 0));
    }

    #[test]
    fn compare_flags_differences() {
        let t = tp(AlgebraSpec::divided_power(f3(), 2));
        let fast = kernel_generator_profile(&t).unwrap();
        let mut rows = oracle_profile(&t).unwrap();
        rows[0].min_generators = 0;
        let m = compare(&fast, &rows);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].degree, m[0].fast, m[0].oracle), (0, 1, 0));
    }
}
