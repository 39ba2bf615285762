//! Finite nets of the positive unit sphere.
//!
//! A net at resolution `h` is obtained from the coordinate grid
//! `G = {0, h, 2h, …, 1}` (the last step may be shorter than `h`): every
//! nonzero `g ∈ Gⁿ` is scaled to the sphere. Only the grid points on the
//! outer faces of the cube (some coordinate equal to 1) are kept, because
//! every ray through the positive orthant meets exactly one of them.
//!
//! # Mesh certificate
//!
//! Let `x ∈ S⁺` and `u = x / maxᵢ xᵢ`, so `u ∈ [0,1]ⁿ` has a coordinate
//! equal to 1. Rounding each coordinate of `u` to the nearest grid value
//! gives a face point `g` with `|uᵢ − gᵢ| ≤ h/2`, hence
//! `‖u − g‖ ≤ (h/2)·Σᵢ‖eᵢ‖`, while `‖u‖ ≥ minᵢ‖eᵢ‖` by monotonicity. For
//! nonzero `a`, `b` one has `‖a/‖a‖ − b/‖b‖‖ ≤ 2‖a − b‖/‖a‖`, so
//!
//! ```text
//! ‖x − g/‖g‖‖ ≤ h·Σᵢ‖eᵢ‖ / minᵢ‖eᵢ‖ =: meshNorm.
//! ```
//!
//! Restricting to a coordinate support `A` (the positive sphere of the
//! sublattice spanned by `{eᵢ : i ∈ A}`) works the same way with the sums and
//! minima taken over `A`.

use crate::error::{Error, Result};
use crate::space::LatticeSpace;

/// Default cap on the number of points in a single net.
pub const DEFAULT_POINT_CAP: usize = 2_000_000;

/// Grid values `0, h, 2h, …, 1` for `0 < h ≤ 1`.
pub fn grid_values(h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidResolution(h));
    }
    let steps = ((1.0 / h) - 1e-9).ceil().max(1.0) as usize;
    let mut values: Vec<f64> = (0..steps).map(|i| i as f64 * h).collect();
    values.push(1.0);
    Ok(values)
}

/// Number of face points of the grid with `values` entries per axis.
pub fn face_point_count(values: usize, dim: usize) -> u64 {
    let m = values as u64;
    m.saturating_pow(dim as u32) - (m - 1).saturating_pow(dim as u32)
}

/// `h·Σ_{i∈A}‖eᵢ‖ / min_{i∈A}‖eᵢ‖`.
///
/// A one-point support has an exact net, so its certificate is zero.
pub fn mesh_certificate(space: &LatticeSpace, support: &[usize], h: f64) -> f64 {
    if support.len() == 1 {
        return 0.0;
    }
    let e = space.basis_norms();
    let sum: f64 = support.iter().map(|&i| e[i]).sum();
    let min = support
        .iter()
        .map(|&i| e[i])
        .fold(f64::INFINITY, f64::min);
    h * sum / min
}

#[derive(Debug, Clone)]
pub struct SphereNet {
    dim: usize,
    support: Vec<usize>,
    h: f64,
    mesh_norm: f64,
    /// Row-major, `len() * dim` entries.
    coords: Vec<f64>,
}

impl SphereNet {
    /// Net of the whole positive sphere `S⁺`.
    pub fn positive(space: &LatticeSpace, h: f64) -> Result<Self> {
        let support: Vec<usize> = (0..space.dim()).collect();
        Self::positive_on(space, &support, h, DEFAULT_POINT_CAP)
    }

    /// Net of the positive sphere of the sublattice spanned by `support`.
    pub fn positive_on(
        space: &LatticeSpace,
        support: &[usize],
        h: f64,
        point_cap: usize,
    ) -> Result<Self> {
        let n = space.dim();
        if support.is_empty() || support.iter().any(|&i| i >= n) {
            return Err(Error::OutOfRange(format!(
                "support {support:?} is not a nonempty subset of 0..{n}"
            )));
        }
        let values = grid_values(h)?;
        let count = face_point_count(values.len(), support.len());
        if count > point_cap as u64 {
            return Err(Error::BudgetExceeded {
                needed: count,
                budget: point_cap as u64,
                suggested_h: suggest_h(h, count as f64, point_cap as f64, support.len() - 1),
            });
        }
        let top = values.len() - 1;
        let d = support.len();
        let mut coords = Vec::with_capacity(count as usize * n);
        let mut index = vec![0usize; d];
        let mut g = vec![0.0; n];
        loop {
            if index.contains(&top) {
                for (slot, &k) in support.iter().zip(&index) {
                    g[*slot] = values[k];
                }
                let norm = space.eval(&g);
                coords.extend(g.iter().map(|v| v / norm));
            }
            // Odometer, last axis fastest: points come out in lexicographic
            // order of their grid indices.
            let mut axis = d;
            loop {
                if axis == 0 {
                    return Ok(Self {
                        dim: n,
                        support: support.to_vec(),
                        h,
                        mesh_norm: mesh_certificate(space, support, h),
                        coords,
                    });
                }
                axis -= 1;
                if index[axis] < top {
                    index[axis] += 1;
                    break;
                }
                index[axis] = 0;
            }
        }
    }

    /// One representative of each `±` orbit of the full unit sphere: every
    /// sign pattern applied to every point, with zero coordinates left
    /// positive and the first nonzero coordinate kept positive.
    pub fn signed_orbits(&self) -> Self {
        let n = self.dim;
        let mut coords = Vec::new();
        for p in self.points() {
            let nonzero: Vec<usize> = (0..n).filter(|&i| p[i] != 0.0).collect();
            let free = nonzero.len().saturating_sub(1);
            for mask in 0u64..(1u64 << free) {
                let mut q = p.to_vec();
                for (bit, &i) in nonzero.iter().skip(1).enumerate() {
                    if mask >> bit & 1 == 1 {
                        q[i] = -q[i];
                    }
                }
                coords.extend_from_slice(&q);
            }
        }
        Self {
            dim: n,
            support: self.support.clone(),
            h: self.h,
            mesh_norm: self.mesh_norm,
            coords,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn resolution(&self) -> f64 {
        self.h
    }

    /// Every point of the sphere (or sub-sphere) is within this distance,
    /// in the space's norm, of some net point.
    pub fn mesh_norm(&self) -> f64 {
        self.mesh_norm
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// The resolution whose worst-case count would fit `budget`, assuming the
/// count scales like `h^{-exponent}`.
pub(crate) fn suggest_h(h: f64, needed: f64, budget: f64, exponent: usize) -> f64 {
    if exponent == 0 || needed <= budget {
        return h;
    }
    (h * (needed / budget).powf(1.0 / exponent as f64)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn grid_values_end_at_one() {
        assert_eq!(grid_values(0.5).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = grid_values(0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(grid_values(1.0).unwrap(), vec![0.0, 1.0]);
        assert!(grid_values(0.0).is_err());
        assert!(grid_values(1.5).is_err());
        assert_eq!(grid_values(0.02).unwrap().len(), 51);
    }

    #[test]
    fn two_dim_half_step_net() {
        let s = catalog::lp(2.0, 2);
        let net = SphereNet::positive(&s, 0.5).unwrap();
        let expected: Vec<Vec<f64>> = [[0.0, 1.0], [0.5, 1.0], [1.0, 0.0], [1.0, 0.5], [1.0, 1.0]]
            .iter()
            .map(|g| s.normalize(g))
            .collect();
        let got: Vec<Vec<f64>> = net.points().map(<[f64]>::to_vec).collect();
        assert_eq!(got, expected);
        for p in net.points() {
            assert!((s.eval(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dim_net_is_a_single_point() {
        for h in [1.0, 0.3, 0.01] {
            let s = catalog::lp(3.0, 1);
            let net = SphereNet::positive(&s, h).unwrap();
            assert_eq!(net.len(), 1);
            assert_eq!(net.point(0), &[1.0]);
        }
    }

    #[test]
    fn three_dim_fine_net_count_and_certificate() {
        let s = catalog::counterexample_3d();
        let net = SphereNet::positive(&s, 0.01).unwrap();
        // Enumerate the face points of {0,…,100}³ directly.
        let mut count = 0;
        for i in 0..=100 {
            for j in 0..=100 {
                for k in 0..=100 {
                    if i == 100 || j == 100 || k == 100 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(net.len(), count);
        assert!(net.len() <= 101 * 101 * 101);
        for p in net.points() {
            assert!((s.eval(p) - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|v| *v >= 0.0));
        }
        // Σ‖eᵢ‖ = 2.5, min ‖eᵢ‖ = 0.5.
        assert!((net.mesh_norm() - 0.01 * 2.5 / 0.5).abs() < 1e-15);
    }

    #[test]
    fn mesh_certificate_covers_random_sphere_points() {
        use rand::{Rng, SeedableRng};
        let s = catalog::counterexample_3d();
        let net = SphereNet::positive(&s, 0.1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let g: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
            let x = s.normalize(&g);
            let nearest = net
                .points()
                .map(|p| {
                    let d: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
                    s.eval(&d)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= net.mesh_norm());
        }
    }

    #[test]
    fn point_cap_is_an_explicit_error() {
        let s = catalog::lp(1.0, 6);
        let err = SphereNet::positive_on(&s, &[0, 1, 2, 3, 4, 5], 0.01, 1000).unwrap_err();
        match err {
            Error::BudgetExceeded { suggested_h, .. } => assert!(suggested_h > 0.01),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn signed_orbits_skip_duplicate_signs() {
        let s = catalog::lp(1.0, 2);
        let net = SphereNet::positive(&s, 0.5).unwrap().signed_orbits();
        // (0,1), (1,0) once each; three full-support points twice each.
        assert_eq!(net.len(), 2 + 3 * 2);
        for p in net.points() {
            let first = p.iter().find(|v| **v != 0.0).unwrap();
            assert!(*first > 0.0);
        }
    }
}
