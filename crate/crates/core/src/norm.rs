//! Lattice norm expressions on ℝⁿ.
//!
//! Every expression is evaluated on `|x|`, so each one is a function of the
//! coordinate moduli only. Leaf weighted p-norms, maxima, positive scalings
//! and block p-sums of lattice norms are again lattice norms. A [`NormExpr::FormMax`]
//! with nonnegative rows is one as well; rows with negative entries are accepted
//! at construction and surface as violations in
//! [`LatticeSpace::validate`](crate::space::LatticeSpace::validate).

use crate::error::{Error, Result};

/// Exponent of a p-norm, `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn validate(self) -> Result<Self> {
        match self {
            Exponent::Finite(p) if p.is_finite() && p >= 1.0 => Ok(self),
            Exponent::Finite(p) if p == f64::INFINITY => Ok(Exponent::Infinity),
            Exponent::Finite(p) => Err(Error::InvalidNorm(format!(
                "exponent p = {p} is outside [1, inf]"
            ))),
            Exponent::Infinity => Ok(self),
        }
    }

    /// `p` as a float (`f64::INFINITY` for the max norm).
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p == f64::INFINITY {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormExpr {
    /// `(Σ wᵢ|xᵢ|^p)^{1/p}`, or `maxᵢ wᵢ|xᵢ|` for `p = ∞`.
    WeightedP { p: Exponent, weights: Vec<f64> },
    /// Pointwise maximum of norms on the same space.
    MaxOf(Vec<NormExpr>),
    /// `c · ‖x‖` for `c > 0`.
    Scale { c: f64, term: Box<NormExpr> },
    /// `maxⱼ Σᵢ rows[j][i]·|xᵢ|`.
    FormMax { rows: Vec<Vec<f64>> },
    /// p-sum of the norms of consecutive coordinate blocks.
    BlockSum { p: Exponent, blocks: Vec<NormExpr> },
}

impl NormExpr {
    /// Unweighted `ℓ_pⁿ`.
    pub fn lp(p: impl Into<Exponent>, dim: usize) -> Result<Self> {
        Self::weighted_p(p, vec![1.0; dim])
    }

    pub fn weighted_p(p: impl Into<Exponent>, weights: Vec<f64>) -> Result<Self> {
        let expr = NormExpr::WeightedP {
            p: p.into().validate()?,
            weights,
        };
        expr.validate()?;
        Ok(expr)
    }

    pub fn max_of(terms: Vec<NormExpr>) -> Result<Self> {
        let expr = NormExpr::MaxOf(terms);
        expr.validate()?;
        Ok(expr)
    }

    pub fn scale(c: f64, term: NormExpr) -> Result<Self> {
        let expr = NormExpr::Scale {
            c,
            term: Box::new(term),
        };
        expr.validate()?;
        Ok(expr)
    }

    pub fn form_max(rows: Vec<Vec<f64>>) -> Result<Self> {
        let expr = NormExpr::FormMax { rows };
        expr.validate()?;
        Ok(expr)
    }

    pub fn block_sum(p: impl Into<Exponent>, blocks: Vec<NormExpr>) -> Result<Self> {
        let expr = NormExpr::BlockSum {
            p: p.into().validate()?,
            blocks,
        };
        expr.validate()?;
        Ok(expr)
    }

    /// Checks structural consistency and returns the dimension.
    pub fn validate(&self) -> Result<usize> {
        match self {
            NormExpr::WeightedP { p, weights } => {
                p.validate()?;
                if weights.is_empty() {
                    return Err(Error::InvalidNorm("lp leaf with no coordinates".into()));
                }
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                    return Err(Error::InvalidNorm(format!(
                        "lp weight {w} is not a positive finite number"
                    )));
                }
                Ok(weights.len())
            }
            NormExpr::MaxOf(terms) => {
                let first = terms
                    .first()
                    .ok_or_else(|| Error::InvalidNorm("max with no terms".into()))?
                    .validate()?;
                for term in &terms[1..] {
                    let d = term.validate()?;
                    if d != first {
                        return Err(Error::DimensionMismatch {
                            expected: first,
                            found: d,
                        });
                    }
                }
                Ok(first)
            }
            NormExpr::Scale { c, term } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::InvalidNorm(format!(
                        "scale factor {c} is not a positive finite number"
                    )));
                }
                term.validate()
            }
            NormExpr::FormMax { rows } => {
                let dim = rows
                    .first()
                    .ok_or_else(|| Error::InvalidNorm("formmax with no rows".into()))?
                    .len();
                if dim == 0 {
                    return Err(Error::InvalidNorm("formmax rows are empty".into()));
                }
                for (j, row) in rows.iter().enumerate() {
                    if row.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            found: row.len(),
                        });
                    }
                    if row.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidNorm(format!(
                            "formmax row {j} has a non-finite coefficient"
                        )));
                    }
                    if row.iter().all(|v| *v == 0.0) {
                        return Err(Error::InvalidNorm(format!("formmax row {j} is zero")));
                    }
                }
                for i in 0..dim {
                    if !rows.iter().any(|row| row[i] > 0.0) {
                        return Err(Error::InvalidNorm(format!(
                            "formmax gives coordinate {i} no positive weight"
                        )));
                    }
                }
                Ok(dim)
            }
            NormExpr::BlockSum { p, blocks } => {
                p.validate()?;
                if blocks.is_empty() {
                    return Err(Error::InvalidNorm("blocksum with no blocks".into()));
                }
                blocks.iter().try_fold(0, |acc, b| Ok(acc + b.validate()?))
            }
        }
    }

    /// Dimension of the space the expression acts on. Assumes a valid tree.
    pub fn dim(&self) -> usize {
        match self {
            NormExpr::WeightedP { weights, .. } => weights.len(),
            NormExpr::MaxOf(terms) => terms.first().map_or(0, NormExpr::dim),
            NormExpr::Scale { term, .. } => term.dim(),
            NormExpr::FormMax { rows } => rows.first().map_or(0, Vec::len),
            NormExpr::BlockSum { blocks, .. } => blocks.iter().map(NormExpr::dim).sum(),
        }
    }

    /// Evaluates the expression at `|x|`. `x.len()` must equal `self.dim()`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            NormExpr::WeightedP { p, weights } => weighted_p(*p, weights, x),
            NormExpr::MaxOf(terms) => terms.iter().map(|t| t.eval(x)).fold(0.0, f64::max),
            NormExpr::Scale { c, term } => c * term.eval(x),
            NormExpr::FormMax { rows } => rows
                .iter()
                .map(|row| row.iter().zip(x).map(|(r, v)| r * v.abs()).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
            NormExpr::BlockSum { p, blocks } => {
                let mut offset = 0;
                let mut acc = 0.0f64;
                for block in blocks {
                    let d = block.dim();
                    let v = block.eval(&x[offset..offset + d]);
                    offset += d;
                    acc = match p {
                        Exponent::Infinity => acc.max(v),
                        Exponent::Finite(q) if *q == 1.0 => acc + v,
                        Exponent::Finite(q) => acc + v.powf(*q),
                    };
                }
                match p {
                    Exponent::Finite(q) if *q != 1.0 => acc.powf(1.0 / q),
                    _ => acc,
                }
            }
        }
    }
}

fn weighted_p(p: Exponent, weights: &[f64], x: &[f64]) -> f64 {
    match p {
        Exponent::Infinity => weights
            .iter()
            .zip(x)
            .map(|(w, v)| w * v.abs())
            .fold(0.0, f64::max),
        Exponent::Finite(1.0) => weights.iter().zip(x).map(|(w, v)| w * v.abs()).sum(),
        Exponent::Finite(2.0) => weights
            .iter()
            .zip(x)
            .map(|(w, v)| w * v * v)
            .sum::<f64>()
            .sqrt(),
        Exponent::Finite(q) => {
            // Scale by the largest modulus so the powers stay in range.
            let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = weights
                .iter()
                .zip(x)
                .map(|(w, v)| w * (v.abs() / m).powf(q))
                .sum();
            m * s.powf(1.0 / q)
        }
    }
}
