//! A finite-dimensional Banach lattice: ℝⁿ with the coordinatewise order and
//! a lattice norm given by a [`NormExpr`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::check_finite;
use crate::norm::NormExpr;

/// Relative slack used when sampling the norm axioms.
const AXIOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpace {
    norm: NormExpr,
    dim: usize,
    basis_norms: Vec<f64>,
}

impl LatticeSpace {
    pub fn new(norm: NormExpr) -> Result<Self> {
        let dim = norm.validate()?;
        let mut e = vec![0.0; dim];
        let mut basis_norms = Vec::with_capacity(dim);
        for i in 0..dim {
            e[i] = 1.0;
            let v = norm.eval(&e);
            e[i] = 0.0;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::DegenerateBasis { index: i, value: v });
            }
            basis_norms.push(v);
        }
        Ok(Self {
            norm,
            dim,
            basis_norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &NormExpr {
        &self.norm
    }

    /// `‖eᵢ‖` for each coordinate.
    pub fn basis_norms(&self) -> &[f64] {
        &self.basis_norms
    }

    /// Checked evaluation of `‖x‖`.
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        check_finite(x)?;
        Ok(self.norm.eval(x))
    }

    /// Unchecked evaluation for inner loops; `x.len()` must be `self.dim()`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.norm.eval(x)
    }

    /// Weights `(lower, upper)` with `maxᵢ|xᵢ|·lowerᵢ ≤ ‖x‖ ≤ Σᵢ|xᵢ|·upperᵢ`.
    ///
    /// For a lattice norm both are the basis norms: `|xᵢ|eᵢ ≤ |x|` gives the
    /// lower bound by monotonicity and the triangle inequality gives the upper.
    pub fn sandwich_constants(&self) -> (Vec<f64>, Vec<f64>) {
        (self.basis_norms.clone(), self.basis_norms.clone())
    }

    pub fn min_basis_norm(&self) -> f64 {
        self.basis_norms.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Scales a nonzero vector onto the unit sphere.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        let n = self.eval(x);
        x.iter().map(|v| v / n).collect()
    }

    /// Randomized check of the lattice-norm axioms on `samples` triples.
    pub fn validate(&self, samples: usize, seed: u64) -> ValidationReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        0.0
                    } else {
                        rng.gen_range(-2.0..2.0)
                    }
                })
                .collect()
        };
        for sample in 0..samples.max(1) {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            let t: f64 = rng.gen_range(-3.0..3.0);
            let nx = self.eval(&x);
            let ny = self.eval(&y);

            if x.iter().any(|v| *v != 0.0) && !(nx > 0.0) {
                return ValidationReport::failed(
                    sample,
                    Property::Positivity,
                    vec![x],
                    nx,
                    0.0,
                );
            }

            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            let lhs = self.eval(&tx);
            let rhs = t.abs() * nx;
            if (lhs - rhs).abs() > AXIOM_TOL * (1.0 + rhs) {
                return ValidationReport::failed(
                    sample,
                    Property::Homogeneity,
                    vec![x, vec![t]],
                    lhs,
                    rhs,
                );
            }

            // |s| ≤ |x| coordinatewise, signs scrambled.
            let s: Vec<f64> = x
                .iter()
                .map(|v| {
                    let frac: f64 = rng.gen_range(0.0..=1.0);
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    sign * frac * v
                })
                .collect();
            let lhs = self.eval(&s);
            if lhs > nx + AXIOM_TOL * (1.0 + nx) {
                return ValidationReport::failed(
                    sample,
                    Property::Monotonicity,
                    vec![s, x],
                    lhs,
                    nx,
                );
            }

            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let lhs = self.eval(&sum);
            let rhs = nx + ny;
            if lhs > rhs + AXIOM_TOL * (1.0 + rhs) {
                return ValidationReport::failed(
                    sample,
                    Property::Triangle,
                    vec![x, y],
                    lhs,
                    rhs,
                );
            }
        }
        ValidationReport {
            samples: samples.max(1),
            violation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Positivity,
    Homogeneity,
    Triangle,
    Monotonicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub property: Property,
    pub sample: usize,
    /// The vectors involved (for homogeneity, the second entry is `[t]`).
    pub witnesses: Vec<Vec<f64>>,
    /// The side of the inequality that should have been smaller.
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub violation: Option<Violation>,
}

impl ValidationReport {
    fn failed(
        sample: usize,
        property: Property,
        witnesses: Vec<Vec<f64>>,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        Self {
            samples: sample + 1,
            violation: Some(Violation {
                property,
                sample,
                witnesses,
                lhs,
                rhs,
            }),
        }
    }

    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}
