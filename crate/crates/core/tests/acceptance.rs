//! Acceptance gate: one PASS/FAIL line per criterion.

use std::f64::consts::SQRT_2;
use std::io::Write;

use latconst::catalog;
use latconst::constants::{
    alpha, beta, constant_battery, james, lambda_plus, lambda_schaffer, ConstantEstimate,
    SearchOptions,
};
use latconst::constructions::{
    diagonal_isomorphism, direct_sum_l1, direction_samples, extract_linfty2,
    extract_linfty2_search, EmbeddingReport,
};
use latconst::moduli::{delta_m, eps_grid, identity_battery, sigma, IdentityReport};
use latconst::suite::random_diagonals;
use latconst::{LatticeSpace, NormExpr, Result};

const VALUE_TOL: f64 = 5e-3;
const PLANAR_TOL: f64 = 1e-2;
const PRODUCT_TOL: f64 = 2e-2;
const MIN_GAP: f64 = 0.02;
const MODULI_TOL: f64 = 1e-2;
const EXACT_EMBED_TOL: f64 = 1e-9;
const WITNESS_EMBED_TOL: f64 = 1e-6;
const INVARIANCE_TOL: f64 = 1e-9;

/// Failure messages of one criterion.
#[derive(Default)]
struct Findings(Vec<String>);

impl Findings {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.0.push(what());
        }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.require((got - want).abs() <= tol, || {
            format!("{what}: {got:.6} vs {want:.6} (tol {tol})")
        });
    }
}

fn opts(dim: usize) -> SearchOptions {
    SearchOptions::for_dim(dim)
}

fn report(n: usize, title: &str, run: impl FnOnce(&mut Findings) -> Result<()>) -> bool {
    let mut f = Findings::default();
    if let Err(e) = run(&mut f) {
        f.0.push(format!("error: {e}"));
    }
    // Written to the process stdout so the lines survive libtest capture.
    let mut out = std::io::stdout().lock();
    let passed = f.0.is_empty();
    let verdict = if passed { "PASS" } else { "FAIL" };
    writeln!(out, "criterion {n:>2}: {verdict}  {title}").expect("stdout");
    for m in &f.0 {
        writeln!(out, "              {m}").expect("stdout");
    }
    passed
}

fn c1(f: &mut Findings) -> Result<()> {
    for n in [2, 3] {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let s = catalog::lp(p, n);
            let want = 2f64.powf(1.0 / p);
            for e in [
                lambda_plus(&s, &opts(n))?,
                beta(&s, &opts(n))?,
                alpha(&s, &opts(n))?,
            ] {
                f.close(&format!("l{p}^{n} {}", e.kind.name()), e.estimate, want, VALUE_TOL);
            }
        }
    }
    Ok(())
}

fn c2(f: &mut Findings) -> Result<()> {
    let s = catalog::counterexample_3d();
    let lp = lambda_plus(&s, &opts(3))?;
    let b = beta(&s, &opts(3))?;
    f.close("beta", b.estimate, 15.0 / 11.0, VALUE_TOL);
    f.require(lp.estimate <= 4.0 / 3.0 + VALUE_TOL, || {
        format!("lambda_plus {:.6} > 4/3", lp.estimate)
    });
    f.require(b.estimate - lp.estimate >= MIN_GAP, || {
        format!("gap {:.6} < {MIN_GAP}", b.estimate - lp.estimate)
    });
    Ok(())
}

fn c3(f: &mut Findings) -> Result<()> {
    let mut spaces = vec![("octagon".to_string(), catalog::octagon())];
    for a in [1.0, 1.2, 1.4] {
        spaces.push((format!("clipped({a})"), catalog::clipped_euclidean(a)));
    }
    for seed in 0..20u64 {
        spaces.push((
            format!("formmax(seed {seed})"),
            catalog::random_form_max(2, 2 + (seed % 3) as usize, 1000 + seed),
        ));
    }
    for (name, s) in &spaces {
        let lp = lambda_plus(s, &opts(2))?;
        let b = beta(s, &opts(2))?;
        let e = s.basis_norms();
        let corner = s.eval(&[1.0 / e[0], 1.0 / e[1]]);
        f.close(&format!("{name} lambda_plus - beta"), lp.estimate, b.estimate, PLANAR_TOL);
        f.close(&format!("{name} beta - |(1,1)|"), b.estimate, corner, PLANAR_TOL);
    }
    Ok(())
}

fn c4(f: &mut Findings) -> Result<()> {
    let o = catalog::octagon();
    f.close("octagon lambda", lambda_schaffer(&o, &opts(2))?.estimate, SQRT_2, VALUE_TOL);
    f.close("octagon lambda_plus", lambda_plus(&o, &opts(2))?.estimate, SQRT_2, VALUE_TOL);
    for a in [1.0, 1.2, 1.4] {
        let s = catalog::clipped_euclidean(a);
        f.close(&format!("clipped({a}) lambda_plus"), lambda_plus(&s, &opts(2))?.estimate, SQRT_2 / a, VALUE_TOL);
        f.close(&format!("clipped({a}) beta"), beta(&s, &opts(2))?.estimate, SQRT_2 / a, VALUE_TOL);
    }
    for n in [2, 3] {
        let l1 = catalog::lp(1.0, n);
        for e in [lambda_plus(&l1, &opts(n))?, beta(&l1, &opts(n))?, alpha(&l1, &opts(n))?] {
            f.close(&format!("l1^{n} {}", e.kind.name()), e.estimate, 2.0, VALUE_TOL);
        }
        let li = catalog::linf(n);
        for e in [lambda_plus(&li, &opts(n))?, beta(&li, &opts(n))?] {
            f.close(&format!("linf^{n} {}", e.kind.name()), e.estimate, 1.0, VALUE_TOL);
        }
    }
    Ok(())
}

fn c5(f: &mut Findings) -> Result<()> {
    for named in catalog::suite_norms() {
        let b = constant_battery(&named.space, &opts(named.space.dim()))?;
        for link in &b.chain {
            f.require(link.holds && link.consistent, || {
                format!(
                    "{}: {} <= {} violated (margin {:.3e})",
                    named.name,
                    link.left.name(),
                    link.right.name(),
                    link.margin
                )
            });
        }
        f.close(
            &format!("{} lambda*J", named.name),
            b.lambda.estimate * b.james.estimate,
            2.0,
            PRODUCT_TOL,
        );
    }
    Ok(())
}

fn moduli_spaces() -> Vec<(String, LatticeSpace, Option<f64>)> {
    let mut v: Vec<_> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&p| (format!("l{p}^3"), catalog::lp(p, 3), Some(p)))
        .collect();
    v.push(("counterexample_3d".into(), catalog::counterexample_3d(), None));
    v
}

fn c6(f: &mut Findings, reports: &[(String, IdentityReport)]) -> Result<()> {
    const REQUIRED: [&str; 6] = [
        "sigma_lower_bound_by_delta",
        "sigma_upper_bound_by_delta",
        "delta_sigma_identity",
        "sigma_one_lipschitz",
        "delta_at_inverse_lambda_plus",
        "lambda_plus_below_sigma_plus_two_minus_eps",
    ];
    for (name, r) in reports {
        for want in REQUIRED {
            f.require(r.checks.iter().any(|c| c.name == want), || {
                format!("{name}: {want} missing")
            });
        }
        for c in r.checks.iter().filter(|c| REQUIRED.contains(&c.name)) {
            f.require(c.tolerance <= MODULI_TOL && c.passed, || {
                format!("{name}: {} at {:?}: {:.6} vs {:.6}", c.name, c.eps, c.lhs, c.rhs)
            });
        }
    }
    Ok(())
}

fn c7(f: &mut Findings, reports: &[(String, IdentityReport)]) -> Result<()> {
    for ((name, r), (_, _, p)) in reports.iter().zip(moduli_spaces()) {
        let Some(p) = p else { continue };
        for (s, d) in r.sigma.values.iter().zip(&r.delta.values) {
            let e = s.parameter.unwrap_or(0.0);
            let sig = (1.0 + e.powf(p)).powf(1.0 / p) - 1.0;
            let del = 1.0 - (1.0 - e.powf(p)).max(0.0).powf(1.0 / p);
            f.close(&format!("{name} sigma({e})"), s.estimate, sig, MODULI_TOL);
            f.close(&format!("{name} delta({e})"), d.estimate, del, MODULI_TOL);
            if p == 1.0 {
                f.close(&format!("{name} delta({e}) = eps"), d.estimate, e, MODULI_TOL);
                f.close(&format!("{name} sigma({e}) = eps"), s.estimate, e, MODULI_TOL);
            }
        }
    }
    Ok(())
}

fn c8(f: &mut Findings) -> Result<()> {
    let s = catalog::lp(1.0, 2);
    let o = SearchOptions::for_moduli(2);
    let d = delta_m(&s, 0.5, &o)?.estimate;
    let sg = sigma(&s, 0.5, &o)?.estimate;
    f.close("delta(1/2)", d, 0.5, MODULI_TOL);
    f.close("sigma/(1+sigma) at 1/2", sg / (1.0 + sg), 1.0 / 3.0, MODULI_TOL);
    let r = identity_battery(&s, &eps_grid(0.0, 1.0, 0.1)?, &o)?;
    let at_half = r.quotient_formula.iter().find(|q| q.eps == 0.5);
    f.require(r.quotient_formula_refuted && at_half.is_some_and(|q| !q.holds), || {
        "quotient formula not reported false at 1/2".into()
    });
    Ok(())
}

/// Both displayed bounds, checked afresh on every sampled direction.
fn embedding_bounds(f: &mut Findings, name: &str, s: &LatticeSpace, r: &EmbeddingReport, tol: f64) {
    let samples = direction_samples();
    f.require(samples.len() >= 1000, || format!("{name}: only {} samples", samples.len()));
    let mut worst = 0.0f64;
    for (a, b) in samples {
        let v: Vec<f64> = r.x_prime.iter().zip(&r.y_prime).map(|(p, q)| a * p + b * q).collect();
        let m = a.abs().max(b.abs());
        let n = s.eval(&v);
        worst = worst
            .max((1.0 - r.epsilon) * m - n)
            .max(n - (1.0 + r.epsilon) * m);
    }
    f.require(worst <= tol, || format!("{name}: bound violated by {worst:.3e}"));
    f.require(r.sampled_distortion <= r.analytic_distortion + EXACT_EMBED_TOL, || {
        format!("{name}: sampled {} > analytic {}", r.sampled_distortion, r.analytic_distortion)
    });
}

fn c9(f: &mut Findings) -> Result<()> {
    let li = catalog::linf(3);
    let given = extract_linfty2(&li, &[1.0, 0.5, 0.0], &[0.0, 0.5, 1.0])?;
    embedding_bounds(f, "linf^3 given", &li, &given, EXACT_EMBED_TOL);
    let searched = extract_linfty2_search(&li, &opts(3), 1e-3)?;
    embedding_bounds(f, "linf^3 witness", &li, &searched, EXACT_EMBED_TOL);
    let o = catalog::octagon();
    let r = extract_linfty2_search(&o, &opts(2), 1e-3)?;
    embedding_bounds(f, "octagon witness", &o, &r, WITNESS_EMBED_TOL);
    f.close("octagon defect", r.epsilon, SQRT_2 - 1.0, 1e-6);
    Ok(())
}

fn c10(f: &mut Findings) -> Result<()> {
    for (name, s) in [("counterexample_3d", catalog::counterexample_3d()), ("linf^2", catalog::linf(2))] {
        let (l0, b0) = (lambda_plus(&s, &opts(s.dim()))?, beta(&s, &opts(s.dim()))?);
        for m in [1, 2] {
            let z = direct_sum_l1(&s, m)?;
            let o = opts(z.dim());
            f.close(&format!("{name}+l1^{m} lambda_plus"), lambda_plus(&z, &o)?.estimate, l0.estimate, MODULI_TOL);
            f.close(&format!("{name}+l1^{m} beta"), beta(&z, &o)?.estimate, b0.estimate, MODULI_TOL);
        }
    }
    for (k, (name, s)) in [
        ("l1.5^2", catalog::lp(1.5, 2)),
        ("octagon", catalog::octagon()),
        ("counterexample_3d", catalog::counterexample_3d()),
    ]
    .into_iter()
    .enumerate()
    {
        let o = opts(s.dim());
        let base = [lambda_plus(&s, &o)?, beta(&s, &o)?];
        for d in random_diagonals(s.dim(), 10, 7 + k as u64) {
            let (y, dist) = diagonal_isomorphism(&s, &d, &o)?;
            let kappa = dist.kappa_upper;
            for (b, e) in base.iter().zip([lambda_plus(&y, &o)?, beta(&y, &o)?]) {
                let (lo, hi) = (b.estimate / kappa, b.estimate * kappa);
                f.require(e.estimate >= lo - VALUE_TOL && e.estimate <= hi + VALUE_TOL, || {
                    format!("{name} d={d:?}: {} {:.6} outside [{lo:.6}, {hi:.6}]", e.kind.name(), e.estimate)
                });
            }
        }
    }
    Ok(())
}

type Constant = fn(&LatticeSpace, &SearchOptions) -> Result<ConstantEstimate>;

const ALL: [(&str, Constant); 5] = [
    ("lambda", lambda_schaffer),
    ("lambda_plus", lambda_plus),
    ("beta", beta),
    ("alpha", alpha),
    ("james", james),
];

fn permuted(expr: &NormExpr, perm: &[usize]) -> NormExpr {
    // v ↦ ‖(v_{perm⁻¹})‖ for FormMax; other catalog norms here are symmetric.
    match expr {
        NormExpr::FormMax { rows } => NormExpr::FormMax {
            rows: rows.iter().map(|r| perm.iter().map(|&i| r[i]).collect()).collect(),
        },
        other => other.clone(),
    }
}

fn c11(f: &mut Findings) -> Result<()> {
    // Halving h: the fine interval is no wider and sits inside the coarse one.
    for (name, s, h) in [
        ("l1.5^2", catalog::lp(1.5, 2), 0.04),
        ("octagon", catalog::octagon(), 0.04),
        ("counterexample_3d", catalog::counterexample_3d(), 0.1),
    ] {
        let n = s.dim();
        for (cname, c) in ALL {
            let coarse = c(&s, &opts(n).with_h(h))?;
            let fine = c(&s, &opts(n).with_h(h / 2.0))?;
            f.require(fine.width() <= coarse.width() + 1e-12, || {
                format!("{name} {cname}: width {:.4e} at h/2 > {:.4e} at h", fine.width(), coarse.width())
            });
            f.require(fine.lower >= coarse.lower - 1e-9 && fine.upper <= coarse.upper + 1e-9, || {
                format!(
                    "{name} {cname}: [{:.6}, {:.6}] at h/2 not inside [{:.6}, {:.6}]",
                    fine.lower, fine.upper, coarse.lower, coarse.upper
                )
            });
        }
    }
    // Scale and permutation invariance.
    let cx = catalog::counterexample_3d();
    for (name, s, perm) in [
        ("counterexample_3d", cx.clone(), vec![1, 2, 0]),
        ("octagon", catalog::octagon(), vec![1, 0]),
        ("l1.5^3", catalog::lp(1.5, 3), vec![2, 0, 1]),
    ] {
        let o = opts(s.dim());
        let scaled = LatticeSpace::new(NormExpr::scale(3.7, s.expr().clone())?)?;
        let perm = LatticeSpace::new(permuted(s.expr(), &perm))?;
        for (cname, c) in ALL {
            let base = c(&s, &o)?.estimate;
            f.close(&format!("{name} scaled {cname}"), c(&scaled, &o)?.estimate, base, INVARIANCE_TOL);
            f.close(&format!("{name} permuted {cname}"), c(&perm, &o)?.estimate, base, INVARIANCE_TOL);
        }
    }
    // Determinism: identical serialized output.
    let a = serde_json::to_string(&constant_battery(&cx, &opts(3))?).expect("serializes");
    let b = serde_json::to_string(&constant_battery(&cx, &opts(3))?).expect("serializes");
    f.require(a == b, || "two runs differ".into());
    Ok(())
}

#[test]
fn acceptance() {
    let grid = eps_grid(0.0, 1.0, 0.1).unwrap();
    let mut verdicts = vec![
        report(1, "lp values of lambda_plus, beta, alpha", c1),
        report(2, "three-dimensional counterexample", c2),
        report(3, "two-dimensional collapse", c3),
        report(4, "named values", c4),
        report(5, "inequality chain and lambda*J = 2", c5),
    ];
    let reports: Result<Vec<(String, IdentityReport)>> = moduli_spaces()
        .into_iter()
        .map(|(name, s, _)| Ok((name, identity_battery(&s, &grid, &SearchOptions::for_moduli(3))?)))
        .collect();
    verdicts.push(report(6, "moduli identities", |f| c6(f, &reports.clone()?)));
    verdicts.push(report(7, "closed-form moduli", |f| c7(f, &reports.clone()?)));
    verdicts.push(report(8, "quotient formula refuted on l1^2", c8));
    verdicts.push(report(9, "embedding bounds", c9));
    verdicts.push(report(10, "l1-sum invariance and diagonal isomorphisms", c10));
    verdicts.push(report(11, "refinement, invariance, determinism", c11));
    let failed: Vec<usize> = verdicts
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
