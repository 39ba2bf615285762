//! Built-in lattice norms used by the verification suite and the tests.

use crate::norm::{Exponent, NormExpr};
use crate::space::LatticeSpace;

fn build(expr: NormExpr) -> LatticeSpace {
    LatticeSpace::new(expr).expect("catalog norms are valid")
}

/// `ℓ_pⁿ`; pass `f64::INFINITY` for `ℓ∞ⁿ`.
pub fn lp(p: f64, dim: usize) -> LatticeSpace {
    build(NormExpr::lp(p, dim).expect("valid lp"))
}

pub fn linf(dim: usize) -> LatticeSpace {
    build(NormExpr::lp(Exponent::Infinity, dim).expect("valid linf"))
}

/// `(|x| + |z|/2) ∨ (|y| + |z|/2) ∨ (2|x|/3 + 2|y|/3 + |z|/3) ∨ 5(|x| + |y|)/6`
/// on ℝ³, the three-dimensional lattice whose disjoint infimum exceeds the
/// lattice Schäffer constant.
pub fn counterexample_3d() -> LatticeSpace {
    build(counterexample_3d_expr())
}

pub fn counterexample_3d_expr() -> NormExpr {
    NormExpr::form_max(vec![
        vec![1.0, 0.0, 0.5],
        vec![0.0, 1.0, 0.5],
        vec![2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0],
        vec![5.0 / 6.0, 5.0 / 6.0, 0.0],
    ])
    .expect("valid form max")
}

/// `max{‖·‖_∞, ‖·‖₁/√2}` on ℝ².
pub fn octagon() -> LatticeSpace {
    build(octagon_expr())
}

pub fn octagon_expr() -> NormExpr {
    NormExpr::max_of(vec![
        NormExpr::lp(Exponent::Infinity, 2).expect("valid"),
        NormExpr::scale(
            std::f64::consts::FRAC_1_SQRT_2,
            NormExpr::lp(1.0, 2).expect("valid"),
        )
        .expect("valid"),
    ])
    .expect("valid max")
}

/// `max{‖·‖₂, a‖·‖_∞}` on ℝ², meant for `1 ≤ a < √2`.
pub fn clipped_euclidean(a: f64) -> LatticeSpace {
    build(
        NormExpr::max_of(vec![
            NormExpr::lp(2.0, 2).expect("valid"),
            NormExpr::scale(a, NormExpr::lp(Exponent::Infinity, 2).expect("valid"))
                .expect("valid"),
        ])
        .expect("valid max"),
    )
}

/// `ℓ∞² ⊕₁ ℝ`.
pub fn linf2_plus_line() -> LatticeSpace {
    build(
        NormExpr::block_sum(
            1.0,
            vec![
                NormExpr::lp(Exponent::Infinity, 2).expect("valid"),
                NormExpr::lp(1.0, 1).expect("valid"),
            ],
        )
        .expect("valid block sum"),
    )
}

/// A random FormMax norm on ℝ^`dim` with `rows` forms and entries in
/// `[0, 1)`, rescaled per column so that every `‖eᵢ‖ = 1`.
pub fn random_form_max(dim: usize, rows: usize, seed: u64) -> LatticeSpace {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut m: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    for i in 0..dim {
        let top = m.iter().map(|r| r[i]).fold(0.0, f64::max);
        for r in &mut m {
            r[i] /= top;
        }
    }
    build(NormExpr::form_max(m).expect("valid form max"))
}

/// A named space from the built-in list.
#[derive(Debug, Clone)]
pub struct Named {
    pub name: String,
    pub space: LatticeSpace,
}

/// Every norm the built-in suite runs the constant chain on.
pub fn suite_norms() -> Vec<Named> {
    let mut out = Vec::new();
    for n in [2, 3] {
        for p in [1.0, 1.5, 2.0, 3.0] {
            out.push(Named {
                name: format!("l{p}^{n}"),
                space: lp(p, n),
            });
        }
        out.push(Named {
            name: format!("linf^{n}"),
            space: linf(n),
        });
    }
    out.push(Named {
        name: "counterexample_3d".into(),
        space: counterexample_3d(),
    });
    out.push(Named {
        name: "octagon".into(),
        space: octagon(),
    });
    for a in [1.0, 1.2, 1.4] {
        out.push(Named {
            name: format!("clipped_euclidean({a})"),
            space: clipped_euclidean(a),
        });
    }
    out
}
