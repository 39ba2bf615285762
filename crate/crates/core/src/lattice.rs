//! Coordinatewise vector lattice operations on ℝⁿ.

use crate::error::{Error, Result};

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Returns `Err` if any entry is NaN or infinite.
pub fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Coordinatewise minimum `x ∧ y`.
pub fn meet(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a.min(*b)).collect())
}

/// Coordinatewise maximum `x ∨ y`.
pub fn join(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a.max(*b)).collect())
}

/// Lattice modulus `|x| = x ∨ (−x)`.
pub fn absval(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.abs()).collect()
}

pub fn is_positive(x: &[f64]) -> bool {
    x.iter().all(|&v| v >= 0.0)
}

/// `x ∧ y = 0` for positive `x`, `y`: the supports do not intersect.
pub fn are_disjoint(x: &[f64], y: &[f64]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| a.abs().min(b.abs()) == 0.0)
}

pub fn add(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a + b).collect())
}

pub fn sub(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a - b).collect())
}
