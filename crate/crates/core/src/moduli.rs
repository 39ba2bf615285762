//! Moduli of monotonicity and their characteristics.
//!
//! `σ(ε) = inf{‖x + εy‖ − 1 : x, y ∈ S⁺}` is computed like λ⁺, with
//! Lipschitz factor `1 + ε`.
//!
//! For `δ(ε) = inf{1 − ‖x − y‖ : 0 ≤ y ≤ x, ‖x‖ ≤ 1, ‖y‖ ≥ ε}` write
//! `u = x − y ≥ 0`. Shrinking `y` to norm exactly `ε` keeps the pair feasible
//! and leaves `u` alone, so with `u = r·w`, `y = ε·v` and `w, v ∈ S⁺`
//!
//! ```text
//! 1 − δ(ε) = sup{R(w, v) : w, v ∈ S⁺},   R(w, v) = sup{r ∈ [0,1] : ‖r·w + ε·v‖ ≤ 1}.
//! ```
//!
//! `R` is decreasing in `w` and `v`, which gives the cell bounds of the net
//! stage. If `‖w − w'‖, ‖v − v'‖ ≤ μ` and `r = R(w, v)`, then `t·r` is
//! feasible for `(w', v')` with `t = (1 − ε − εμ)/(1 − ε + rμ)`, hence
//!
//! ```text
//! sup R ≤ netMax · (1 − ε + μ) / (1 − ε − εμ)     whenever εμ < 1 − ε.
//! ```

use serde::Serialize;

use crate::constants::{
    lambda_plus, new_budget, positive_net, solve, ConstantEstimate, ConstantKind, PairProblem,
    SearchOptions,
};
use crate::error::{Error, Result};
use crate::search::{Domain, Objective, Sense};
use crate::space::LatticeSpace;

/// Accuracy of refined modulus estimates, used for shape checks on curves.
pub const ESTIMATE_TOL: f64 = 1e-3;

/// Default threshold below which a modulus counts as zero.
pub const DEFAULT_THRESHOLD: f64 = 3.0 * ESTIMATE_TOL;

/// Tolerance of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-2;

/// Bisection steps for a characteristic.
const BISECTION_STEPS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulus {
    /// Upper modulus of monotonicity.
    Sigma,
    /// Lower modulus of uniform monotonicity.
    Delta,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(format!("eps = {eps} is not in [0, 1]")));
    }
    Ok(())
}

fn zero(kind: ConstantKind, space: &LatticeSpace, opts: &SearchOptions) -> ConstantEstimate {
    let mut e = vec![0.0; space.dim()];
    e[0] = 1.0;
    let e = space.normalize(&e);
    let mut est = ConstantEstimate::exact(kind, 0.0, e.clone(), e, opts.h);
    est.parameter = Some(0.0);
    if kind == ConstantKind::Delta {
        est.witnesses[1] = vec![0.0; space.dim()];
    }
    est
}

/// `σ(ε)`, certified from below.
pub fn sigma(space: &LatticeSpace, eps: f64, opts: &SearchOptions) -> Result<ConstantEstimate> {
    check_eps(eps)?;
    opts.validate()?;
    if eps == 0.0 {
        return Ok(zero(ConstantKind::Sigma, space, opts));
    }
    let net = positive_net(space, opts)?;
    let mesh = net.mesh_norm();
    let problem = PairProblem {
        objective: Objective::Sum { c: eps },
        sense: Sense::Min,
        xs: &net,
        ys: if eps == 1.0 { None } else { Some(&net) },
        domain: Domain::positive(space.dim()),
    };
    let out = solve(space, &problem, opts, &mut new_budget(opts))?;
    let slack = (1.0 + eps) * mesh;
    let estimate = (out.refined.value - 1.0).clamp(0.0, eps);
    let lower = (out.net.value - 1.0 - slack).max(0.0).min(estimate);
    Ok(ConstantEstimate {
        kind: ConstantKind::Sigma,
        parameter: Some(eps),
        lower,
        estimate,
        upper: estimate,
        net_value: out.net.value - 1.0,
        witnesses: [out.refined.x, out.refined.y],
        mesh_norm: mesh,
        slack,
        resolution: opts.h,
        evaluations: out.evaluations,
        cross_check: None,
    })
}

/// `δ_m(ε)`, certified from below. The witnesses are the pair
/// `0 ≤ y ≤ x` with `‖x‖ ≤ 1`, `‖y‖ = ε`.
pub fn delta_m(space: &LatticeSpace, eps: f64, opts: &SearchOptions) -> Result<ConstantEstimate> {
    check_eps(eps)?;
    opts.validate()?;
    if eps == 0.0 {
        return Ok(zero(ConstantKind::Delta, space, opts));
    }
    let net = positive_net(space, opts)?;
    let mu = net.mesh_norm();
    let problem = PairProblem {
        objective: Objective::Radius { eps },
        sense: Sense::Max,
        xs: &net,
        ys: Some(&net),
        domain: Domain::positive(space.dim()),
    };
    let out = solve(space, &problem, opts, &mut new_budget(opts))?;
    // The root finder returns the feasible end of a 1e-13 bracket.
    let net_r = out.net.value + 1e-12;
    let denom = 1.0 - eps - eps * mu;
    let r_star = if denom > 0.0 {
        (net_r * (1.0 - eps + mu) / denom).min(1.0)
    } else {
        1.0
    };
    let r = out.refined.value;
    let estimate = (1.0 - r).clamp(0.0, 1.0);
    let lower = (1.0 - r_star).max(0.0).min(estimate);
    let (w, v) = (&out.refined.x, &out.refined.y);
    let y: Vec<f64> = v.iter().map(|t| eps * t).collect();
    let x: Vec<f64> = w.iter().zip(&y).map(|(a, b)| r * a + b).collect();
    Ok(ConstantEstimate {
        kind: ConstantKind::Delta,
        parameter: Some(eps),
        lower,
        estimate,
        upper: estimate,
        net_value: 1.0 - out.net.value,
        witnesses: [x, y],
        mesh_norm: mu,
        slack: r_star - out.net.value,
        resolution: opts.h,
        evaluations: out.evaluations,
        cross_check: None,
    })
}

pub fn modulus(
    space: &LatticeSpace,
    which: Modulus,
    eps: f64,
    opts: &SearchOptions,
) -> Result<ConstantEstimate> {
    match which {
        Modulus::Sigma => sigma(space, eps, opts),
        Modulus::Delta => delta_m(space, eps, opts),
    }
}

/// `{0, step, 2·step, …}` up to 1, with 1 included.
pub fn eps_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || start > end {
        return Err(Error::OutOfRange(format!(
            "eps grid {start}:{end} is not inside [0, 1]"
        )));
    }
    if !(step > 0.0) {
        return Err(Error::OutOfRange(format!("eps grid step {step} must be positive")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count)
        .map(|k| {
            // Snap to a clean decimal so grids print as written.
            let v = start + k as f64 * step;
            (v * 1e12).round() / 1e12
        })
        .collect();
    if end - grid[grid.len() - 1] > 1e-9 {
        grid.push(end);
    }
    Ok(grid)
}

/// The default grid `{0, 0.05, …, 1}`.
pub fn default_eps_grid() -> Vec<f64> {
    eps_grid(0.0, 1.0, 0.05).expect("valid grid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusCurve {
    pub which: Modulus,
    pub eps_grid: Vec<f64>,
    pub values: Vec<ConstantEstimate>,
    /// Non-decreasing within [`ESTIMATE_TOL`].
    pub monotone: bool,
    /// 1-Lipschitz within [`ESTIMATE_TOL`]; checked for σ only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<bool>,
}

pub fn curve(
    space: &LatticeSpace,
    which: Modulus,
    grid: &[f64],
    opts: &SearchOptions,
) -> Result<ModulusCurve> {
    let values = grid
        .iter()
        .map(|&e| modulus(space, which, e, opts))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<_> = values.windows(2).map(|w| (&w[0], &w[1])).collect();
    let monotone = pairs
        .iter()
        .all(|(a, b)| b.estimate >= a.estimate - ESTIMATE_TOL);
    let lipschitz = (which == Modulus::Sigma).then(|| {
        pairs.iter().all(|(a, b)| {
            let de = (b.parameter.unwrap_or(0.0) - a.parameter.unwrap_or(0.0)).abs();
            (b.estimate - a.estimate).abs() <= de + ESTIMATE_TOL
        })
    });
    Ok(ModulusCurve {
        which,
        eps_grid: grid.to_vec(),
        values,
        monotone,
        lipschitz,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Characteristic {
    pub which: Modulus,
    /// Largest ε at which the modulus estimate is at most `threshold`.
    pub value: f64,
    pub threshold: f64,
    /// Width of the final bisection bracket.
    pub tolerance: f64,
}

/// `sup{ε ∈ [0,1) : modulus(ε) = 0}`, read as the largest ε with estimate at
/// most `threshold`, by bisection on the non-decreasing modulus.
pub fn characteristic(
    space: &LatticeSpace,
    which: Modulus,
    opts: &SearchOptions,
    threshold: Option<f64>,
) -> Result<Characteristic> {
    let threshold = threshold.unwrap_or(DEFAULT_THRESHOLD);
    let vanishes = |e: f64| -> Result<bool> { Ok(modulus(space, which, e, opts)?.estimate <= threshold) };
    if vanishes(1.0)? {
        return Ok(Characteristic {
            which,
            value: 1.0,
            threshold,
            tolerance: 0.0,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if vanishes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Characteristic {
        which,
        value: lo,
        threshold,
        tolerance: hi - lo,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &'static str, eps: Option<f64>, relation: Relation, lhs: f64, rhs: f64) -> Self {
        let tolerance = IDENTITY_TOL;
        let passed = match relation {
            Relation::Equal => (lhs - rhs).abs() <= tolerance,
            Relation::AtMost => lhs <= rhs + tolerance,
        };
        Self {
            name,
            eps,
            relation,
            lhs,
            rhs,
            tolerance,
            passed,
        }
    }
}

/// One grid point of the rejected quotient formula `δ(ε) = σ(ε)/(1 + σ(ε))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientPoint {
    pub eps: f64,
    pub delta: f64,
    pub quotient: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    pub sigma: ModulusCurve,
    pub delta: ModulusCurve,
    pub lambda_plus: ConstantEstimate,
    pub epsilon_0m: Characteristic,
    pub tilde_epsilon_0m: Characteristic,
    pub quotient_formula: Vec<QuotientPoint>,
    /// The quotient formula fails at some grid point.
    pub quotient_formula_refuted: bool,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn ratio(d: f64) -> f64 {
    if d >= 1.0 {
        f64::INFINITY
    } else {
        d / (1.0 - d)
    }
}

/// Every identity and inequality relating σ, δ_m, their characteristics
/// and λ⁺, checked on refined estimates (each argument computed afresh).
pub fn identity_battery(
    space: &LatticeSpace,
    grid: &[f64],
    opts: &SearchOptions,
) -> Result<IdentityReport> {
    for &e in grid {
        check_eps(e)?;
    }
    let sig = curve(space, Modulus::Sigma, grid, opts)?;
    let del = curve(space, Modulus::Delta, grid, opts)?;
    let lp = lambda_plus(space, opts)?;
    let l = lp.estimate;
    let mut checks = Vec::new();

    for (k, &e) in grid.iter().enumerate() {
        let s = sig.values[k].estimate;
        let d = del.values[k].estimate;
        if e > 0.0 && e < 1.0 {
            let d_shift = delta_m(space, e / (1.0 + e), opts)?.estimate;
            checks.push(IdentityCheck::new(
                "sigma_lower_bound_by_delta",
                Some(e),
                Relation::AtMost,
                ratio(d_shift),
                s,
            ));
            checks.push(IdentityCheck::new(
                "sigma_upper_bound_by_delta",
                Some(e),
                Relation::AtMost,
                s,
                ratio(d),
            ));
        }
        let d_at = delta_m(space, e / (1.0 + s), opts)?.estimate;
        checks.push(IdentityCheck::new(
            "delta_sigma_identity",
            Some(e),
            Relation::Equal,
            d_at,
            s / (1.0 + s),
        ));
        checks.push(IdentityCheck::new(
            "lambda_plus_below_sigma_plus_two_minus_eps",
            Some(e),
            Relation::AtMost,
            l,
            s + 2.0 - e,
        ));
    }

    let worst_lipschitz = sig
        .values
        .windows(2)
        .map(|w| {
            let de = (w[1].parameter.unwrap_or(0.0) - w[0].parameter.unwrap_or(0.0)).abs();
            (w[1].estimate - w[0].estimate).abs() - de
        })
        .fold(0.0f64, f64::max);
    checks.push(IdentityCheck::new(
        "sigma_one_lipschitz",
        None,
        Relation::AtMost,
        worst_lipschitz,
        0.0,
    ));
    let worst_drop = del
        .values
        .windows(2)
        .map(|w| w[0].estimate - w[1].estimate)
        .fold(0.0f64, f64::max);
    checks.push(IdentityCheck::new(
        "delta_non_decreasing",
        None,
        Relation::AtMost,
        worst_drop,
        0.0,
    ));

    let e0 = characteristic(space, Modulus::Delta, opts, None)?;
    let te0 = characteristic(space, Modulus::Sigma, opts, None)?;
    let s_at = sigma(space, te0.value, opts)?.estimate;
    checks.push(IdentityCheck::new(
        "sigma_vanishes_at_its_characteristic",
        Some(te0.value),
        Relation::Equal,
        s_at,
        0.0,
    ));
    checks.push(IdentityCheck::new(
        "characteristic_delta_below_sigma",
        None,
        Relation::AtMost,
        e0.value,
        te0.value,
    ));
    checks.push(IdentityCheck::new(
        "characteristic_sigma_below_twice_delta",
        None,
        Relation::AtMost,
        te0.value,
        2.0 * e0.value,
    ));
    checks.push(IdentityCheck::new(
        "characteristic_sigma_below_two_minus_lambda_plus",
        None,
        Relation::AtMost,
        te0.value,
        2.0 - l,
    ));

    let d_inv = delta_m(space, 1.0 / l, opts)?.estimate;
    checks.push(IdentityCheck::new(
        "delta_at_inverse_lambda_plus",
        Some(1.0 / l),
        Relation::Equal,
        d_inv,
        (l - 1.0) / l,
    ));
    let d_half = delta_m(space, 0.5, opts)?.estimate;
    checks.push(IdentityCheck::new(
        "inverse_one_minus_delta_half_below_lambda_plus",
        Some(0.5),
        Relation::AtMost,
        1.0 / (1.0 - d_half),
        l,
    ));
    checks.push(IdentityCheck::new(
        "characteristic_delta_below_inverse_lambda_plus",
        None,
        Relation::AtMost,
        e0.value,
        1.0 / l,
    ));
    let s1 = sigma(space, 1.0, opts)?;
    checks.push(IdentityCheck::new(
        "sigma_one_plus_one_is_lambda_plus",
        Some(1.0),
        Relation::Equal,
        s1.estimate + 1.0,
        l,
    ));
    // λ⁺ > 1 exactly when the δ characteristic is below 1.
    let s = IDENTITY_TOL;
    let strictly_above_one = l > 1.0 + s;
    let characteristic_below_one = e0.value < 1.0 - s;
    checks.push(IdentityCheck::new(
        "lambda_plus_above_one_iff_characteristic_below_one",
        None,
        Relation::Equal,
        f64::from(u8::from(strictly_above_one)),
        f64::from(u8::from(characteristic_below_one)),
    ));

    let quotient_formula: Vec<QuotientPoint> = grid
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < 1.0)
        .map(|(k, &e)| {
            let s = sig.values[k].estimate;
            let d = del.values[k].estimate;
            let q = s / (1.0 + s);
            QuotientPoint {
                eps: e,
                delta: d,
                quotient: q,
                holds: (d - q).abs() <= IDENTITY_TOL,
            }
        })
        .collect();
    let quotient_formula_refuted = quotient_formula.iter().any(|p| !p.holds);

    Ok(IdentityReport {
        checks,
        sigma: sig,
        delta: del,
        lambda_plus: lp,
        epsilon_0m: e0,
        tilde_epsilon_0m: te0,
        quotient_formula,
        quotient_formula_refuted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeReport {
    pub sigma_one: ConstantEstimate,
    pub lambda_plus: ConstantEstimate,
    /// `|σ(1) + 1 − λ⁺|` on estimates.
    pub difference: f64,
    /// Both intervals, shifted, overlap and the estimates agree within the
    /// combined slack.
    pub agrees: bool,
}

/// `σ(1) + 1` against `λ⁺`: the same infimum reached by two searches.
pub fn sigma_lambda_bridge(space: &LatticeSpace, opts: &SearchOptions) -> Result<BridgeReport> {
    let s = sigma(space, 1.0, opts)?;
    let l = lambda_plus(space, opts)?;
    let difference = (s.estimate + 1.0 - l.estimate).abs();
    let slack = s.slack + l.slack;
    let overlap = s.lower + 1.0 <= l.upper + 1e-12 && l.lower <= s.upper + 1.0 + 1e-12;
    Ok(BridgeReport {
        agrees: overlap && difference <= slack.max(1e-9),
        sigma_one: s,
        lambda_plus: l,
        difference,
    })
}
