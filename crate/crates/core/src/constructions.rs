//! Constructions on lattices: disjointification, almost isometric copies of
//! `ℓ∞²`, diagonal lattice isomorphisms and `ℓ₁` direct sums.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::constants::{lambda_plus, positive_net, SearchOptions};
use crate::error::{Error, Result};
use crate::lattice::{check_finite, is_positive, meet};
use crate::norm::{Exponent, NormExpr};
use crate::space::LatticeSpace;

/// Tolerance for "on the unit sphere".
pub const SPHERE_TOL: f64 = 1e-9;

/// Number of `(cos θ, sin θ)` directions sampled by [`extract_linfty2`].
pub const DIRECTION_SAMPLES: usize = 1000;

/// `(z, x′, y′)` with `z = x ∧ y`, `x′ = x − z`, `y′ = y − z`.
///
/// `x′ ∧ y′ = 0` and `x′ + y′ = |x − y|` hold exactly: in each coordinate
/// one of `x′ᵢ`, `y′ᵢ` is `0.0` and the other is the difference.
pub fn disjoint_parts(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    check_finite(x)?;
    check_finite(y)?;
    if !is_positive(x) || !is_positive(y) {
        return Err(Error::NegativeInput);
    }
    let z = meet(x, y)?;
    let xp = x.iter().zip(&z).map(|(a, m)| a - m).collect();
    let yp = y.iter().zip(&z).map(|(b, m)| b - m).collect();
    Ok((z, xp, yp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub y_prime: Vec<f64>,
    /// `‖x + y‖ − 1`.
    pub epsilon: f64,
    /// `(1 + ε)/(1 − ε)`.
    pub analytic_distortion: f64,
    /// `max/min` of `‖a·x′ + b·y′‖ / max{|a|, |b|}` over the samples.
    pub sampled_distortion: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
    /// Largest violation of `(1 − ε) ≤ ratio ≤ (1 + ε)` over the samples;
    /// non-positive when both bounds hold.
    pub worst_bound_violation: f64,
}

impl EmbeddingReport {
    pub fn bounds_hold(&self, tol: f64) -> bool {
        self.worst_bound_violation <= tol
    }
}

fn check_on_sphere(space: &LatticeSpace, v: &[f64]) -> Result<()> {
    let norm = space.norm(v)?;
    if !is_positive(v) || (norm - 1.0).abs() > SPHERE_TOL {
        return Err(Error::NotOnSphere { norm });
    }
    Ok(())
}

/// The `(a, b)` sample: `DIRECTION_SAMPLES` points of the circle plus the
/// four extreme points `(±1, ±1)` of the `ℓ∞²` ball.
pub fn direction_samples() -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = (0..DIRECTION_SAMPLES)
        .map(|k| {
            let t = TAU * k as f64 / DIRECTION_SAMPLES as f64;
            (t.cos(), t.sin())
        })
        .collect();
    out.extend([(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]);
    out
}

/// The map `(a, b) ↦ a·x′ + b·y′` built from a pair `x, y ∈ S⁺` with small
/// defect `ε = ‖x + y‖ − 1`, together with its sampled distortion.
pub fn extract_linfty2(space: &LatticeSpace, x: &[f64], y: &[f64]) -> Result<EmbeddingReport> {
    check_on_sphere(space, x)?;
    check_on_sphere(space, y)?;
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let epsilon = space.eval(&sum) - 1.0;
    // x ≤ y forces ε ≥ 1, so a degenerate pair is reported first.
    let (z, xp, yp) = disjoint_parts(x, y)?;
    if xp.iter().all(|v| *v == 0.0) || yp.iter().all(|v| *v == 0.0) {
        return Err(Error::DegeneratePair);
    }
    if epsilon >= 1.0 {
        return Err(Error::DefectTooLarge { epsilon });
    }
    let (lo, hi) = (1.0 - epsilon, 1.0 + epsilon);
    let samples = direction_samples();
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut worst = f64::NEG_INFINITY;
    let mut v = vec![0.0; x.len()];
    for &(a, b) in &samples {
        for ((vi, p), q) in v.iter_mut().zip(&xp).zip(&yp) {
            *vi = a * p + b * q;
        }
        let ratio = space.eval(&v) / a.abs().max(b.abs());
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        worst = worst.max(lo - ratio).max(ratio - hi);
    }
    Ok(EmbeddingReport {
        x: x.to_vec(),
        y: y.to_vec(),
        z,
        x_prime: xp,
        y_prime: yp,
        epsilon,
        analytic_distortion: hi / lo,
        sampled_distortion: max_ratio / min_ratio,
        min_ratio,
        max_ratio,
        samples: samples.len(),
        worst_bound_violation: worst,
    })
}

/// [`extract_linfty2`] on the witness pair of `λ⁺`. Fails with
/// [`Error::DefectTooLarge`] when `λ⁺ ≥ 2 − tol`.
pub fn extract_linfty2_search(
    space: &LatticeSpace,
    opts: &SearchOptions,
    tol: f64,
) -> Result<EmbeddingReport> {
    let lp = lambda_plus(space, opts)?;
    if lp.estimate >= 2.0 - tol {
        return Err(Error::DefectTooLarge {
            epsilon: lp.estimate - 1.0,
        });
    }
    let [x, y] = &lp.witnesses;
    // Re-normalize: refinement leaves the witnesses on the sphere only up
    // to the last rounding.
    extract_linfty2(space, &space.normalize(x), &space.normalize(y))
}

/// The norm `v ↦ ‖D⁻¹v‖` as an expression, `D = diag(d)`.
fn push_forward(expr: &NormExpr, d: &[f64]) -> NormExpr {
    match expr {
        NormExpr::WeightedP { p, weights } => NormExpr::WeightedP {
            p: *p,
            weights: weights
                .iter()
                .zip(d)
                .map(|(w, di)| match p {
                    Exponent::Finite(p) => w / di.powf(*p),
                    Exponent::Infinity => w / di,
                })
                .collect(),
        },
        NormExpr::MaxOf(terms) => {
            NormExpr::MaxOf(terms.iter().map(|t| push_forward(t, d)).collect())
        }
        NormExpr::Scale { c, term } => NormExpr::Scale {
            c: *c,
            term: Box::new(push_forward(term, d)),
        },
        NormExpr::FormMax { rows } => NormExpr::FormMax {
            rows: rows
                .iter()
                .map(|r| r.iter().zip(d).map(|(a, di)| a / di).collect())
                .collect(),
        },
        NormExpr::BlockSum { p, blocks } => {
            let mut start = 0;
            let blocks = blocks
                .iter()
                .map(|b| {
                    let end = start + b.dim();
                    let out = push_forward(b, &d[start..end]);
                    start = end;
                    out
                })
                .collect();
            NormExpr::BlockSum { p: *p, blocks }
        }
    }
}

/// Operator norm of the formal identity `X → Y`, from below and above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorNorm {
    pub estimate: f64,
    pub upper: f64,
}

/// `sup{‖x‖_Y : x ∈ S_X}`. Both norms are lattice norms, so the supremum
/// is attained on `S⁺_X`. With `μ` the mesh of the net of `S⁺_X`,
/// `‖x‖_Y ≤ netMax + ‖I‖·μ`, hence `‖I‖ ≤ netMax / (1 − μ)` for `μ < 1`.
fn identity_norm(x_space: &LatticeSpace, y_space: &LatticeSpace, opts: &SearchOptions) -> Result<OperatorNorm> {
    let net = positive_net(x_space, opts)?;
    let mut best = 0.0f64;
    let mut arg = net.point(0).to_vec();
    for p in net.points() {
        let v = y_space.eval(p);
        if v > best {
            best = v;
            arg = p.to_vec();
        }
    }
    let net_max = best;
    // Pattern search on the normalized direction.
    let ratio = |u: &[f64]| y_space.eval(u) / x_space.eval(u);
    let mut step = opts.h;
    while step > opts.refine_tol {
        let mut improved = false;
        for k in 0..arg.len() {
            for s in [step, -step] {
                let mut u = arg.clone();
                u[k] = (u[k] + s).max(0.0);
                if u.iter().all(|t| *t == 0.0) {
                    continue;
                }
                let r = ratio(&u);
                if r > best {
                    best = r;
                    arg = x_space.normalize(&u);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let mu = net.mesh_norm();
    let upper = if mu < 1.0 {
        (net_max / (1.0 - mu)).max(best)
    } else {
        f64::INFINITY
    };
    Ok(OperatorNorm {
        estimate: best,
        upper,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distortion {
    /// `‖I : X → Y‖`.
    pub forward: OperatorNorm,
    /// `‖I : Y → X‖`.
    pub inverse: OperatorNorm,
    /// `forward · inverse`, estimated.
    pub kappa: f64,
    /// Certified upper bound on the distortion.
    pub kappa_upper: f64,
}

/// The space `Y = (ℝⁿ, v ↦ ‖D⁻¹v‖)`, lattice isometric to `X` through
/// `T = diag(d)`, and the distortion `‖I‖·‖I⁻¹‖` of the formal identity
/// `X → Y`, which is a lattice isomorphism between the two norms.
pub fn diagonal_isomorphism(
    space: &LatticeSpace,
    d: &[f64],
    opts: &SearchOptions,
) -> Result<(LatticeSpace, Distortion)> {
    if d.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: d.len(),
        });
    }
    check_finite(d)?;
    if d.iter().any(|v| *v <= 0.0) {
        return Err(Error::OutOfRange(format!(
            "diagonal {d:?} must be strictly positive"
        )));
    }
    let image = LatticeSpace::new(push_forward(space.expr(), d))?;
    let forward = identity_norm(space, &image, opts)?;
    let inverse = identity_norm(&image, space, opts)?;
    let distortion = Distortion {
        kappa: forward.estimate * inverse.estimate,
        kappa_upper: forward.upper * inverse.upper,
        forward,
        inverse,
    };
    Ok((image, distortion))
}

/// `X ⊕₁ ℓ₁^m`.
pub fn direct_sum_l1(space: &LatticeSpace, m: usize) -> Result<LatticeSpace> {
    if m == 0 {
        return Err(Error::OutOfRange("m must be at least 1".into()));
    }
    let expr = NormExpr::block_sum(1.0, vec![space.expr().clone(), NormExpr::lp(1.0, m)?])?;
    LatticeSpace::new(expr)
}
