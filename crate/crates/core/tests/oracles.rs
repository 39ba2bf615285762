//! Library estimates against dense brute-force searches written from the
//! definitions.

use std::f64::consts::{FRAC_PI_2, PI};

use latconst::catalog;
use latconst::constants::{alpha, beta, james, lambda_plus, lambda_schaffer, SearchOptions};
use latconst::constructions::{diagonal_isomorphism, direct_sum_l1};
use latconst::moduli::{delta_m, sigma};
use latconst::LatticeSpace;

const ANGLES: usize = 1500;
/// Oracle accuracy on the positive quarter circle and on the full circle,
/// where kinks of polyhedral norms make the angular error linear.
const QUARTER_TOL: f64 = 2e-3;
const FULL_TOL: f64 = 4e-3;

fn opts(dim: usize) -> SearchOptions {
    SearchOptions::for_dim(dim)
}

/// Unit vectors at `ANGLES` equally spaced angles of `[lo, hi]`.
fn circle(s: &LatticeSpace, lo: f64, hi: f64) -> Vec<[f64; 2]> {
    (0..=ANGLES)
        .map(|k| {
            let t = lo + (hi - lo) * k as f64 / ANGLES as f64;
            let u = [t.cos(), t.sin()];
            let n = s.eval(&u);
            [u[0] / n, u[1] / n]
        })
        .collect()
}

fn pair_extreme(pts: &[[f64; 2]], f: impl Fn(&[f64; 2], &[f64; 2]) -> f64, max: bool) -> f64 {
    let mut best = if max { f64::NEG_INFINITY } else { f64::INFINITY };
    for x in pts {
        for y in pts {
            let v = f(x, y);
            best = if max { best.max(v) } else { best.min(v) };
        }
    }
    best
}

fn planar_spaces() -> Vec<(String, LatticeSpace)> {
    let mut v = vec![
        ("l1.5^2".to_string(), catalog::lp(1.5, 2)),
        ("l3^2".to_string(), catalog::lp(3.0, 2)),
        ("octagon".to_string(), catalog::octagon()),
        ("clipped(1.2)".to_string(), catalog::clipped_euclidean(1.2)),
    ];
    for seed in [3, 8] {
        v.push((format!("formmax({seed})"), catalog::random_form_max(2, 3, seed)));
    }
    v
}

#[test]
fn planar_constants_match_dense_search() {
    for (name, s) in planar_spaces() {
        let pos = circle(&s, 0.0, FRAC_PI_2);
        let full = circle(&s, 0.0, 2.0 * PI);
        let norm = |v: [f64; 2]| s.eval(&v);
        let sum = |x: &[f64; 2], y: &[f64; 2]| norm([x[0] + y[0], x[1] + y[1]]);
        let diff = |x: &[f64; 2], y: &[f64; 2]| norm([x[0] - y[0], x[1] - y[1]]);
        let sup = |x: &[f64; 2], y: &[f64; 2]| norm([x[0].max(y[0]), x[1].max(y[1])]);

        let oracle_lp = pair_extreme(&pos, sum, false);
        let oracle_alpha = pair_extreme(&pos, sup, true);
        let oracle_lambda = pair_extreme(&full, |x, y| sum(x, y).max(diff(x, y)), false);
        let oracle_j = pair_extreme(&full, |x, y| sum(x, y).min(diff(x, y)), true);
        // Disjoint positive unit pairs in the plane are the two normalized axes.
        let e = s.basis_norms();
        let oracle_beta = norm([1.0 / e[0], 1.0 / e[1]]);

        let o = opts(2);
        for (what, got, want, tol) in [
            ("lambda_plus", lambda_plus(&s, &o).unwrap(), oracle_lp, QUARTER_TOL),
            ("beta", beta(&s, &o).unwrap(), oracle_beta, QUARTER_TOL),
            ("alpha", alpha(&s, &o).unwrap(), oracle_alpha, QUARTER_TOL),
            ("lambda", lambda_schaffer(&s, &o).unwrap(), oracle_lambda, FULL_TOL),
            ("james", james(&s, &o).unwrap(), oracle_j, FULL_TOL),
        ] {
            let v = got.estimate;
            assert!((v - want).abs() < tol, "{name} {what}: {v} vs oracle {want}");
            // The estimate is a value attained by unit vectors.
            let [x, y] = &got.witnesses;
            assert!((s.eval(x) - 1.0).abs() < 1e-9 && (s.eval(y) - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn planar_certificates_contain_the_oracle() {
    for (name, s) in planar_spaces() {
        let pos = circle(&s, 0.0, FRAC_PI_2);
        let oracle = pair_extreme(
            &pos,
            |x, y| s.eval(&[x[0] + y[0], x[1] + y[1]]),
            false,
        );
        let e = lambda_plus(&s, &opts(2)).unwrap();
        // The dense search only sees a subset, so it bounds λ⁺ from above.
        assert!(e.lower <= oracle + 1e-12, "{name}: {} > {oracle}", e.lower);
        assert!(e.estimate <= oracle + 1e-9, "{name}: {} > {oracle}", e.estimate);
    }
}

#[test]
fn sigma_matches_dense_search() {
    for (name, s) in planar_spaces() {
        let pos = circle(&s, 0.0, FRAC_PI_2);
        for eps in [0.25, 0.5, 1.0] {
            let oracle = pair_extreme(
                &pos,
                |x, y| s.eval(&[x[0] + eps * y[0], x[1] + eps * y[1]]) - 1.0,
                false,
            );
            let got = sigma(&s, eps, &SearchOptions::for_moduli(2)).unwrap().estimate;
            assert!((got - oracle).abs() < 2e-3, "{name} eps={eps}: {got} vs {oracle}");
        }
    }
}

/// `inf{1 − ‖x − y‖ : 0 ≤ y ≤ x, ‖x‖ ≤ 1, ‖y‖ ≥ ε}` over a square grid.
fn delta_grid_oracle(s: &LatticeSpace, eps: f64, steps: usize) -> f64 {
    let g: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let scale = 1.0 / s.min_basis_norm();
    let mut best = f64::INFINITY;
    for &a in &g {
        for &b in &g {
            let x = [a * scale, b * scale];
            if s.eval(&x) > 1.0 {
                continue;
            }
            for &c in g.iter().filter(|&&c| c * scale <= x[0]) {
                for &d in g.iter().filter(|&&d| d * scale <= x[1]) {
                    let y = [c * scale, d * scale];
                    if s.eval(&y) < eps {
                        continue;
                    }
                    best = best.min(1.0 - s.eval(&[x[0] - y[0], x[1] - y[1]]));
                }
            }
        }
    }
    best
}

#[test]
fn delta_matches_grid_search() {
    for (name, s) in planar_spaces() {
        for eps in [0.3, 0.6, 0.9] {
            let oracle = delta_grid_oracle(&s, eps, 70);
            let got = delta_m(&s, eps, &SearchOptions::for_moduli(2)).unwrap();
            // A grid only sees feasible points, so the oracle is an upper bound.
            assert!(got.estimate <= oracle + 1e-9, "{name} eps={eps}: {} > {oracle}", got.estimate);
            assert!(oracle - got.estimate < 3e-2, "{name} eps={eps}: {} vs {oracle}", got.estimate);
        }
    }
}

#[test]
fn euclidean_plane_moduli_grid() {
    let s = catalog::lp(2.0, 2);
    let o = SearchOptions::for_moduli(2);
    let want = [0.0, 1.25f64.sqrt() - 1.0, 2f64.sqrt() - 1.0];
    for (eps, w) in [0.0, 0.5, 1.0].into_iter().zip(want) {
        assert!((sigma(&s, eps, &o).unwrap().estimate - w).abs() < 1e-6);
    }
    let l1 = catalog::lp(1.0, 2);
    assert!((delta_m(&l1, 0.5, &o).unwrap().estimate - 0.5).abs() < 1e-6);
}

#[test]
fn sandwich_constants_of_the_counterexample() {
    let s = catalog::counterexample_3d();
    // Evaluate the four forms on each basis vector directly.
    let rows = [
        [1.0, 0.0, 0.5],
        [0.0, 1.0, 0.5],
        [2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0],
        [5.0 / 6.0, 5.0 / 6.0, 0.0],
    ];
    let direct: Vec<f64> = (0..3)
        .map(|i| rows.iter().map(|r| r[i]).fold(0.0, f64::max))
        .collect();
    assert_eq!(direct, vec![1.0, 1.0, 0.5]);
    let (lo, hi) = s.sandwich_constants();
    assert_eq!(lo, direct);
    assert_eq!(hi, direct);
}

#[test]
fn counterexample_validates_on_many_samples() {
    let r = catalog::counterexample_3d().validate(10_000, 17);
    assert!(r.passed(), "{:?}", r.violation);
}

#[test]
fn diagonal_distortion_of_l1_plane() {
    let s = catalog::lp(1.0, 2);
    let (y, dist) = diagonal_isomorphism(&s, &[2.0, 1.0], &opts(2)).unwrap();
    // Ratio ‖v‖_Y / ‖v‖_X over dense directions, both ways.
    let pts: Vec<[f64; 2]> = (0..=ANGLES)
        .map(|k| {
            let t = FRAC_PI_2 * k as f64 / ANGLES as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    let fwd = pts.iter().map(|v| y.eval(v) / s.eval(v)).fold(0.0, f64::max);
    let inv = pts.iter().map(|v| s.eval(v) / y.eval(v)).fold(0.0, f64::max);
    assert!((dist.kappa - fwd * inv).abs() < 1e-9);
    assert!((dist.kappa - 2.0).abs() < 1e-9);
    // λ⁺ of the image by dense search; the isomorphism only bounds it.
    let pos = circle(&y, 0.0, FRAC_PI_2);
    let oracle = pair_extreme(&pos, |a, b| y.eval(&[a[0] + b[0], a[1] + b[1]]), false);
    let got = lambda_plus(&y, &opts(2)).unwrap().estimate;
    assert!((got - oracle).abs() < 2e-3);
    assert!(got >= 2.0 / dist.kappa - 1e-9 && got <= 2.0 + 1e-9);
}

#[test]
fn sup_plane_plus_line_keeps_unit_constant() {
    use rand::{Rng, SeedableRng};
    let s = direct_sum_l1(&catalog::linf(2), 1).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    // ‖x + y‖ ≥ ‖x‖ = 1 on the cone; e₁, e₂ attain it.
    let mut best = s.eval(&[1.0, 1.0, 0.0]);
    for _ in 0..20_000 {
        let x = s.normalize(&[rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()]);
        let y = s.normalize(&[rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()]);
        let v: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        best = best.min(s.eval(&v));
    }
    assert!(best >= 1.0 - 1e-12);
    let got = lambda_plus(&s, &opts(3)).unwrap();
    assert!((got.estimate - 1.0).abs() < 1e-9);
    assert!(got.estimate <= best + 1e-12);
}
