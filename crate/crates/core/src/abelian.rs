//! The example `G = ⟨σ⟩ ⋉ H` with `H = V^{⊕n}`, `V = Z/p × Z/p` and σ acting
//! unipotently on each copy of `V`.
//!
//! Only `H¹(H, k) ≅ k^{2n}` is needed. A class `g` has coordinates
//! `(g(x_1), g(y_1), …, g(x_n), g(y_n))` in the basis `x*_1, y*_1, …`, and σ
//! acts by `σ(g)(x_i) = g(x_i)`, `σ(g)(y_i) = g(y_i) - g(x_i)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{nullspace, row_space, SparseMatrix, SparseVec, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AbelianExampleConfig {
    pub p: u32,
    pub n: usize,
}

impl AbelianExampleConfig {
    pub fn new(p: u32, n: usize) -> Result<Self> {
        let cfg = Self { p, n };
        cfg.field()?;
        Ok(cfg)
    }

    fn field(&self) -> Result<PrimeField> {
        if self.n < 1 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        PrimeField::new(self.p)
    }
}

/// `H¹(H, k)` with its σ-action.
///
/// `matrix` is block diagonal with blocks `[[1, -1], [0, 1]]`; row `i` is
/// paired with basis vector `i`, and a coordinate row vector `g` maps to
/// `g · matrix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSpace {
    pub field: PrimeField,
    pub n: usize,
    pub labels: Vec<String>,
    pub matrix: SparseMatrix,
}

impl DualSpace {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// σ as an operator on coordinate columns (the transpose of `matrix`).
    pub fn operator(&self) -> SparseMatrix {
        self.matrix.transpose()
    }

    pub fn act(&self, g: &[(usize, u32)]) -> SparseVec {
        self.operator().apply(g)
    }

    /// `1 - σ` on coordinate columns.
    pub fn one_minus_sigma(&self) -> SparseMatrix {
        SparseMatrix::identity(self.field, self.dim()).sub(&self.operator())
    }

    pub fn invariants(&self) -> Subspace {
        nullspace(&self.one_minus_sigma())
    }

    pub fn image(&self) -> Subspace {
        // column space of 1 - σ
        row_space(&self.one_minus_sigma().transpose())
    }
}

pub fn build_dual(cfg: &AbelianExampleConfig) -> Result<DualSpace> {
    let field = cfg.field()?;
    let minus_one = field.p() - 1;
    let triplets = (0..cfg.n).flat_map(|i| {
        let (x, y) = (2 * i, 2 * i + 1);
        [(x, x, 1), (x, y, minus_one), (y, y, 1)]
    });
    let labels = (1..=cfg.n)
        .flat_map(|i| [format!("x*_{i}"), format!("y*_{i}")])
        .collect();
    Ok(DualSpace {
        field,
        n: cfg.n,
        labels,
        matrix: SparseMatrix::from_triplets(field, 2 * cfg.n, 2 * cfg.n, triplets),
    })
}

/// `Σ_{i<p} σ^i` on `H¹(H, k)`.
pub fn norm_operator(cfg: &AbelianExampleConfig) -> Result<SparseMatrix> {
    let dual = build_dual(cfg)?;
    let s = dual.operator();
    let mut power = SparseMatrix::identity(dual.field, dual.dim());
    let mut sum = power.clone();
    for _ in 1..cfg.p {
        power = power.mul(&s);
        sum = sum.add(&power);
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct E2Terms {
    pub dim_e2_11: usize,
    pub dim_invariants: usize,
    pub dim_image: usize,
}

/// `E₂^{1,1} = ker N / im(1 - σ)` together with the dimensions feeding it.
pub fn e2_terms(cfg: &AbelianExampleConfig) -> Result<E2Terms> {
    let dual = build_dual(cfg)?;
    let kernel = nullspace(&norm_operator(cfg)?);
    let image = dual.image();
    if !image.is_subspace_of(&kernel)? {
        return Err(Error::CheckFailed {
            degree: 1,
            detail: "im(1 - σ) is not inside ker N".into(),
        });
    }
    Ok(E2Terms {
        dim_e2_11: kernel.dim() - image.dim(),
        dim_invariants: dual.invariants().dim(),
        dim_image: image.dim(),
    })
}

/// Product of the degree-one class `f` with an invariant `g`: the class of
/// `g` in `ker N / im(1 - σ)`, returned as its reduced coset representative.
pub fn cup_with_f(cfg: &AbelianExampleConfig, g: &[(usize, u32)]) -> Result<SparseVec> {
    let dual = build_dual(cfg)?;
    if let Some(&(i, _)) = g.iter().find(|&&(i, _)| i >= dual.dim()) {
        return Err(Error::AmbientMismatch {
            left: i + 1,
            right: dual.dim(),
        });
    }
    let mut g: SparseVec = g.iter().copied().filter(|&(_, c)| c % cfg.p != 0).collect();
    g.sort_unstable();
    if dual.act(&g) != g {
        return Err(Error::NotInvariant);
    }
    Ok(dual.image().reduce(&g))
}

/// `dim H¹(H, k) / (H¹(H, k)^σ + im(1 - σ))`.
pub fn obstruction_dim(cfg: &AbelianExampleConfig) -> Result<usize> {
    let dual = build_dual(cfg)?;
    Ok(dual.dim() - dual.invariants().sum(&dual.image())?.dim())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianReport {
    pub p: u32,
    pub n: usize,
    #[serde(rename = "dim_E2_11")]
    pub dim_e2_11: usize,
    pub dim_invariants: usize,
    pub dim_image: usize,
    pub obstruction_dim: usize,
    pub norm_is_zero: bool,
    pub invariants_equal_image: bool,
    /// `dim E₂^{1,0} = dim H¹(⟨σ⟩, k)`, the degree-one part of the kernel.
    pub dim_kernel_degree1: usize,
    /// Upper bound on the codimension of `E∞^{1,1}` in `E₂^{1,1}`
    /// (`dim H³(Z/p, k)`); a stated constant, not computed.
    pub e_infinity_codim_bound: usize,
}

pub fn report(cfg: &AbelianExampleConfig) -> Result<AbelianReport> {
    let dual = build_dual(cfg)?;
    let e2 = e2_terms(cfg)?;
    // σ acts trivially on H⁰(H, k) = k, so H¹(⟨σ⟩, k) is k / im(0).
    let trivial = SparseMatrix::zero(dual.field, 1, 1);
    let dim_kernel_degree1 = 1 - row_space(&trivial).dim();
    Ok(AbelianReport {
        p: cfg.p,
        n: cfg.n,
        dim_e2_11: e2.dim_e2_11,
        dim_invariants: e2.dim_invariants,
        dim_image: e2.dim_image,
        obstruction_dim: obstruction_dim(cfg)?,
        norm_is_zero: norm_operator(cfg)?.is_zero(),
        invariants_equal_image: dual.invariants() == dual.image(),
        dim_kernel_degree1,
        e_infinity_codim_bound: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: u32, n: usize) -> AbelianExampleConfig {
        AbelianExampleConfig::new(p, n).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(matches!(AbelianExampleConfig::new(4, 1), Err(Error::InvalidModulus(4))));
        assert!(matches!(AbelianExampleConfig::new(2, 1), Err(Error::InvalidModulus(2))));
        assert!(matches!(AbelianExampleConfig::new(3, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn dual_matrix_small() {
        let d = build_dual(&cfg(3, 1)).unwrap();
        assert_eq!(d.matrix.to_dense(), vec![vec![1, 2], vec![0, 1]]);
        assert_eq!(d.labels, vec!["x*_1", "y*_1"]);
        // g = x*: σ(g)(y) = g(y) - g(x) = -1
        assert_eq!(d.act(&[(0, 1)]), vec![(0, 1), (1, 2)]);
        assert_eq!(d.act(&[(1, 1)]), vec![(1, 1)]);
    }

    #[test]
    fn unipotent_of_order_p() {
        for p in [3, 5, 7] {
            for n in 1..=4 {
                let d = build_dual(&cfg(p, n)).unwrap();
                let id = SparseMatrix::identity(d.field, d.dim());
                assert_eq!(d.matrix.pow(p as u64), id);
                let nil = d.matrix.sub(&id);
                assert!(nil.mul(&nil).is_zero());
                assert!(!nil.is_zero());
            }
        }
    }

    #[test]
    fn norm_is_zero() {
        for (p, n) in [(3, 1), (5, 2), (3, 4), (7, 3)] {
            let m = norm_operator(&cfg(p, n)).unwrap();
            assert_eq!((m.rows(), m.cols()), (2 * n, 2 * n));
            assert!(m.is_zero());
        }
    }

    #[test]
    fn e2_examples() {
        assert_eq!(
            e2_terms(&cfg(3, 1)).unwrap(),
            E2Terms {
                dim_e2_11: 1,
                dim_invariants: 1,
                dim_image: 1
            }
        );
        assert_eq!(e2_terms(&cfg(3, 4)).unwrap().dim_e2_11, 4);
    }

    #[test]
    fn invariants_are_functionals_vanishing_on_x() {
        for (p, n) in [(3, 1), (3, 3), (5, 6)] {
            let d = build_dual(&cfg(p, n)).unwrap();
            let expected = Subspace::spanned_by_units(d.field, 2 * n, (0..n).map(|i| 2 * i + 1));
            assert_eq!(d.invariants(), expected);
            assert_eq!(d.image(), expected);
        }
    }

    #[test]
    fn cup_examples() {
        let c = cfg(3, 2);
        assert!(cup_with_f(&c, &[(1, 1)]).unwrap().is_empty());
        assert!(cup_with_f(&c, &[]).unwrap().is_empty());
        assert!(cup_with_f(&c, &[(1, 2), (3, 1)]).unwrap().is_empty());
        assert_eq!(cup_with_f(&c, &[(0, 1)]), Err(Error::NotInvariant));
        assert!(matches!(cup_with_f(&c, &[(4, 1)]), Err(Error::AmbientMismatch { .. })));
    }

    #[test]
    fn obstruction_grows_with_n() {
        for p in [3, 5] {
            let dims: Vec<usize> = (1..=6).map(|n| obstruction_dim(&cfg(p, n)).unwrap()).collect();
            assert_eq!(dims, vec![1, 2, 3, 4, 5, 6]);
        }
    }

    #[test]
    fn report_fields() {
        let r = report(&cfg(5, 2)).unwrap();
        assert_eq!(r.obstruction_dim, 2);
        assert!(r.norm_is_zero);
        assert!(r.invariants_equal_image);
        assert_eq!(r.dim_kernel_degree1, 1);
        assert_eq!(r.e_infinity_codim_bound, 1);
    }
}
