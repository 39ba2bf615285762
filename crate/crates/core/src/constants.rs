//! Certified geometric constants: λ⁺, β, α, λ (Schäffer) and J (James).
//!
//! Every constant is an extremum of a function of two sphere points that is
//! 1-Lipschitz in each argument. The net stage computes the exact extremum
//! over net pairs, which after moving each argument by at most the mesh
//! certificate gives a bound on the true value; refinement then improves the
//! witness from the best net pairs, giving the other side of the interval.
//!
//! | constant | type | certified side          | Lipschitz per argument |
//! |----------|------|-------------------------|------------------------|
//! | λ⁺, β, λ | inf  | `lower = net − slack`   | 1                      |
//! | α, J     | sup  | `upper = net + slack`   | 1                      |

use serde::Serialize;

use crate::error::{Error, Result};
use crate::net::{face_point_count, grid_values, suggest_h, SphereNet, DEFAULT_POINT_CAP};
use crate::search::{optimize_pairs, refine, Budget, Candidate, Domain, Objective, Sense, Tree};
use crate::space::LatticeSpace;

/// Largest dimension for which β and α enumerate coordinate partitions.
pub const SUPPORT_CAP: usize = 12;

/// Default cap on net-pair evaluations for one constant.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Coordinate grid step of the nets.
    pub h: f64,
    /// Refinement stops once its step falls below this.
    pub refine_tol: f64,
    /// Cap on objective evaluations in the net stage.
    pub budget: u64,
    /// Number of best net pairs refined.
    pub starts: usize,
    /// Cap on the size of a single net.
    pub point_cap: usize,
}

impl SearchOptions {
    /// `h = 0.02` up to dimension 3, `0.1` up to 6, `0.25` beyond.
    pub fn for_dim(dim: usize) -> Self {
        let h = match dim {
            0..=3 => 0.02,
            4..=6 => 0.1,
            _ => 0.25,
        };
        Self {
            h,
            refine_tol: 1e-10,
            budget: DEFAULT_BUDGET,
            starts: 4,
            point_cap: DEFAULT_POINT_CAP,
        }
    }

    /// Defaults for the moduli. Their net stage is a full pair search over
    /// the sphere for every ε, so three-dimensional nets are coarser.
    pub fn for_moduli(dim: usize) -> Self {
        let h = match dim {
            0..=2 => 0.02,
            3 => 0.05,
            4..=6 => 0.1,
            _ => 0.25,
        };
        Self {
            h,
            ..Self::for_dim(dim)
        }
    }

    pub fn with_h(self, h: f64) -> Self {
        Self { h, ..self }
    }

    pub fn with_budget(self, budget: u64) -> Self {
        Self { budget, ..self }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        grid_values(self.h)?;
        if !(self.refine_tol > 0.0) {
            return Err(Error::OutOfRange(format!(
                "refinement tolerance must be positive, got {}",
                self.refine_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    LambdaPlus,
    Beta,
    Alpha,
    /// `sup{‖x − y‖ : x, y ∈ S⁺}`, an independent formula for α.
    AlphaDifference,
    Schaffer,
    James,
    Sigma,
    Delta,
}

impl ConstantKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstantKind::LambdaPlus => "lambda_plus",
            ConstantKind::Beta => "beta",
            ConstantKind::Alpha => "alpha",
            ConstantKind::AlphaDifference => "alpha_difference",
            ConstantKind::Schaffer => "lambda",
            ConstantKind::James => "james",
            ConstantKind::Sigma => "sigma",
            ConstantKind::Delta => "delta",
        }
    }

    /// Infima are certified from below, suprema from above.
    pub fn is_infimum(self) -> bool {
        matches!(
            self,
            ConstantKind::LambdaPlus
                | ConstantKind::Beta
                | ConstantKind::Schaffer
                | ConstantKind::Sigma
                | ConstantKind::Delta
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub kind: ConstantKind,
    /// The modulus argument ε, for σ and δ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    pub lower: f64,
    pub estimate: f64,
    pub upper: f64,
    /// The extremum over net pairs.
    pub net_value: f64,
    pub witnesses: [Vec<f64>; 2],
    /// Largest mesh certificate among the nets used.
    pub mesh_norm: f64,
    /// Amount by which the net value was moved to get the certified side.
    pub slack: f64,
    pub resolution: f64,
    pub evaluations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<Box<ConstantEstimate>>,
}

impl ConstantEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.lower - tol <= v && v <= self.upper + tol
    }

    /// An exactly known value.
    pub(crate) fn exact(kind: ConstantKind, value: f64, x: Vec<f64>, y: Vec<f64>, h: f64) -> Self {
        Self {
            kind,
            parameter: None,
            lower: value,
            estimate: value,
            upper: value,
            net_value: value,
            witnesses: [x, y],
            mesh_norm: 0.0,
            slack: 0.0,
            resolution: h,
            evaluations: 0,
            cross_check: None,
        }
    }
}

/// One optimization over pairs drawn from two nets.
pub(crate) struct PairProblem<'a> {
    pub objective: Objective,
    pub sense: Sense,
    pub xs: &'a SphereNet,
    /// `None`: pairs from `xs` twice, unordered (symmetric objectives).
    pub ys: Option<&'a SphereNet>,
    pub domain: Domain,
}

pub(crate) struct PairOutcome {
    pub net: Candidate,
    pub refined: Candidate,
    pub evaluations: u64,
}

fn budget_error(problem: &PairProblem, opts: &SearchOptions) -> Error {
    let nx = problem.xs.len() as f64;
    let (pairs, exponent) = match problem.ys {
        None => (nx * (nx + 1.0) / 2.0, 2 * (problem.xs.support().len() - 1)),
        Some(ys) => (
            nx * ys.len() as f64,
            problem.xs.support().len() + ys.support().len() - 2,
        ),
    };
    Error::BudgetExceeded {
        needed: pairs as u64,
        budget: opts.budget,
        suggested_h: suggest_h(opts.h, pairs, opts.budget as f64, exponent),
    }
}

pub(crate) fn solve(
    space: &LatticeSpace,
    problem: &PairProblem,
    opts: &SearchOptions,
    budget: &mut Budget,
) -> Result<PairOutcome> {
    let xt = Tree::new(problem.xs);
    let yt = problem.ys.map(Tree::new);
    let found = optimize_pairs(
        space,
        problem.objective,
        problem.sense,
        &xt,
        yt.as_ref(),
        opts.starts,
        budget,
    )
    .map_err(|_| budget_error(problem, opts))?;
    let sign = match problem.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut refined = found.best.clone();
    for start in &found.starts {
        let c = refine(
            space,
            problem.objective,
            problem.sense,
            &problem.domain,
            start,
            opts.h,
            opts.refine_tol,
        );
        if sign * c.value < sign * refined.value - 1e-15 * (1.0 + refined.value.abs()) {
            refined = c;
        }
    }
    Ok(PairOutcome {
        net: found.best,
        refined,
        evaluations: found.evaluations,
    })
}

pub(crate) fn new_budget(opts: &SearchOptions) -> Budget {
    Budget {
        limit: opts.budget,
        used: 0,
    }
}

/// The net of `S⁺` used by every constant.
pub fn positive_sphere_net(space: &LatticeSpace, h: f64) -> Result<SphereNet> {
    SphereNet::positive(space, h)
}

pub(crate) fn positive_net(space: &LatticeSpace, opts: &SearchOptions) -> Result<SphereNet> {
    let support: Vec<usize> = (0..space.dim()).collect();
    SphereNet::positive_on(space, &support, opts.h, opts.point_cap)
}

/// Certifies an infimum with total Lipschitz slack `slack` and trivial
/// bounds `[floor, ceil]`.
fn infimum(
    kind: ConstantKind,
    outcome: &PairOutcome,
    slack: f64,
    mesh: f64,
    floor: f64,
    ceil: f64,
    opts: &SearchOptions,
) -> ConstantEstimate {
    let estimate = outcome.refined.value.clamp(floor, ceil);
    let lower = (outcome.net.value - slack).max(floor).min(estimate);
    ConstantEstimate {
        kind,
        parameter: None,
        lower,
        estimate,
        upper: estimate,
        net_value: outcome.net.value,
        witnesses: [outcome.refined.x.clone(), outcome.refined.y.clone()],
        mesh_norm: mesh,
        slack,
        resolution: opts.h,
        evaluations: outcome.evaluations,
        cross_check: None,
    }
}

fn supremum(
    kind: ConstantKind,
    outcome: &PairOutcome,
    slack: f64,
    mesh: f64,
    floor: f64,
    ceil: f64,
    opts: &SearchOptions,
) -> ConstantEstimate {
    let estimate = outcome.refined.value.clamp(floor, ceil);
    let upper = (outcome.net.value + slack).min(ceil).max(estimate);
    ConstantEstimate {
        kind,
        parameter: None,
        lower: estimate,
        estimate,
        upper,
        net_value: outcome.net.value,
        witnesses: [outcome.refined.x.clone(), outcome.refined.y.clone()],
        mesh_norm: mesh,
        slack,
        resolution: opts.h,
        evaluations: outcome.evaluations,
        cross_check: None,
    }
}

/// `λ⁺(X) = inf{‖x + y‖ : x, y ∈ S⁺}`.
pub fn lambda_plus(space: &LatticeSpace, opts: &SearchOptions) -> Result<ConstantEstimate> {
    opts.validate()?;
    let n = space.dim();
    if n == 1 {
        let e = space.normalize(&[1.0]);
        return Ok(ConstantEstimate::exact(
            ConstantKind::LambdaPlus,
            2.0,
            e.clone(),
            e,
            opts.h,
        ));
    }
    let net = positive_net(space, opts)?;
    let mesh = net.mesh_norm();
    let problem = PairProblem {
        objective: Objective::Sum { c: 1.0 },
        sense: Sense::Min,
        xs: &net,
        ys: None,
        domain: Domain::positive(n),
    };
    let out = solve(space, &problem, opts, &mut new_budget(opts))?;
    Ok(infimum(
        ConstantKind::LambdaPlus,
        &out,
        2.0 * mesh,
        mesh,
        1.0,
        2.0,
        opts,
    ))
}

/// Splits of the coordinates into two nonempty parts `(A, B)` with `0 ∈ A`.
///
/// Every pair of disjoint nonempty supports sits inside one of them, and the
/// nets of the coordinate subspaces contain points of every smaller
/// support, so these cover all disjoint pairs.
fn partitions(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    (1u64..(1 << (n - 1)))
        .map(|mask| {
            let (b, a): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| i > 0 && mask >> (i - 1) & 1 == 1);
            (a, b)
        })
        .collect()
}

fn disjoint_search(
    space: &LatticeSpace,
    opts: &SearchOptions,
    sense: Sense,
) -> Result<DisjointOutcome> {
    let n = space.dim();
    let mut budget = new_budget(opts);
    let mut best: Option<PairOutcome> = None;
    let start = match sense {
        Sense::Min => f64::INFINITY,
        Sense::Max => f64::NEG_INFINITY,
    };
    let mut certified = start;
    let mut net_extreme = start;
    let mut mesh = 0.0f64;
    for (a, b) in partitions(n) {
        let na = SphereNet::positive_on(space, &a, opts.h, opts.point_cap)?;
        let nb = SphereNet::positive_on(space, &b, opts.h, opts.point_cap)?;
        let slack = na.mesh_norm() + nb.mesh_norm();
        mesh = mesh.max(na.mesh_norm()).max(nb.mesh_norm());
        let problem = PairProblem {
            objective: Objective::Sum { c: 1.0 },
            sense,
            xs: &na,
            ys: Some(&nb),
            domain: Domain {
                x_support: a,
                y_support: b,
                x_signed: false,
                y_signed: false,
            },
        };
        let out = solve(space, &problem, opts, &mut budget)?;
        let better = match sense {
            Sense::Min => {
                certified = certified.min(out.net.value - slack);
                net_extreme = net_extreme.min(out.net.value);
                best.as_ref().is_none_or(|o| out.refined.value < o.refined.value)
            }
            Sense::Max => {
                certified = certified.max(out.net.value + slack);
                net_extreme = net_extreme.max(out.net.value);
                best.as_ref().is_none_or(|o| out.refined.value > o.refined.value)
            }
        };
        if better {
            best = Some(out);
        }
    }
    let mut out = best.expect("dimension ≥ 2 has a partition");
    out.evaluations = budget.used;
    out.net.value = net_extreme;
    Ok(DisjointOutcome {
        out,
        certified,
        mesh,
    })
}

struct DisjointOutcome {
    /// Best refined pair; `net` holds the extremum over all partitions.
    out: PairOutcome,
    /// The certified side, before trivial bounds.
    certified: f64,
    mesh: f64,
}

fn require_support_dims(space: &LatticeSpace, constant: &'static str) -> Result<()> {
    let n = space.dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension {
            constant,
            dim: n,
            min: 2,
        });
    }
    if n > SUPPORT_CAP {
        return Err(Error::SupportCapExceeded {
            dim: n,
            cap: SUPPORT_CAP,
        });
    }
    Ok(())
}

/// `β(X) = inf{‖x + y‖ : x, y ∈ S⁺, x ∧ y = 0}`; needs dimension ≥ 2.
pub fn beta(space: &LatticeSpace, opts: &SearchOptions) -> Result<ConstantEstimate> {
    opts.validate()?;
    require_support_dims(space, "beta")?;
    let d = disjoint_search(space, opts, Sense::Min)?;
    let slack = d.out.net.value - d.certified;
    Ok(infimum(ConstantKind::Beta, &d.out, slack, d.mesh, 1.0, 2.0, opts))
}

/// `α(X) = sup{‖x ∨ y‖ : x, y ∈ B⁺, x ∧ y = 0}`, computed over disjoint pairs
/// of the positive sphere, with `sup{‖x − y‖ : x, y ∈ S⁺}` as cross-check.
/// `α(ℝ) = 1`.
pub fn alpha(space: &LatticeSpace, opts: &SearchOptions) -> Result<ConstantEstimate> {
    opts.validate()?;
    let n = space.dim();
    if n == 1 {
        let e = space.normalize(&[1.0]);
        return Ok(ConstantEstimate::exact(
            ConstantKind::Alpha,
            1.0,
            e,
            vec![0.0],
            opts.h,
        ));
    }
    require_support_dims(space, "alpha")?;
    let d = disjoint_search(space, opts, Sense::Max)?;
    let slack = d.certified - d.out.net.value;
    let mut est = supremum(ConstantKind::Alpha, &d.out, slack, d.mesh, 1.0, 2.0, opts);

    let net = positive_net(space, opts)?;
    let m = net.mesh_norm();
    let problem = PairProblem {
        objective: Objective::Diff,
        sense: Sense::Max,
        xs: &net,
        ys: None,
        domain: Domain::positive(n),
    };
    let diff = solve(space, &problem, opts, &mut new_budget(opts))?;
    est.cross_check = Some(Box::new(supremum(
        ConstantKind::AlphaDifference,
        &diff,
        2.0 * m,
        m,
        0.0,
        2.0,
        opts,
    )));
    Ok(est)
}

fn full_sphere_problem<'a>(
    objective: Objective,
    sense: Sense,
    positive: &'a SphereNet,
    signed: &'a SphereNet,
) -> PairProblem<'a> {
    let n = positive.dim();
    PairProblem {
        objective,
        sense,
        xs: positive,
        ys: Some(signed),
        domain: Domain {
            x_support: (0..n).collect(),
            y_support: (0..n).collect(),
            x_signed: false,
            y_signed: true,
        },
    }
}

/// Builds the signed net after checking its size against the point cap.
fn signed_net(positive: &SphereNet, opts: &SearchOptions) -> Result<SphereNet> {
    let n = positive.dim();
    let values = grid_values(opts.h)?.len();
    // Each support of size k contributes 2^(k−1) sign patterns per point.
    let count = (1..=n).fold(0u64, |acc, k| {
        acc.saturating_add(
            binomial(n, k)
                .saturating_mul(exact_support_count(values, k))
                .saturating_mul(1u64 << (k - 1)),
        )
    });
    if count > opts.point_cap as u64 {
        return Err(Error::BudgetExceeded {
            needed: count,
            budget: opts.point_cap as u64,
            suggested_h: suggest_h(opts.h, count as f64, opts.point_cap as f64, n - 1),
        });
    }
    Ok(positive.signed_orbits())
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Face points with exactly `k` nonzero coordinates on a fixed support of
/// size `k`: the face points of `{1, …, m}ᵏ` (with `m` nonzero values).
fn exact_support_count(values: usize, k: usize) -> u64 {
    face_point_count(values - 1, k)
}

/// `λ(X) = inf{max{‖x − y‖, ‖x + y‖} : x, y ∈ S}`; `λ(ℝ) = 2`.
pub fn lambda_schaffer(space: &LatticeSpace, opts: &SearchOptions) -> Result<ConstantEstimate> {
    opts.validate()?;
    if space.dim() == 1 {
        let e = space.normalize(&[1.0]);
        return Ok(ConstantEstimate::exact(
            ConstantKind::Schaffer,
            2.0,
            e.clone(),
            e,
            opts.h,
        ));
    }
    let positive = positive_net(space, opts)?;
    let signed = signed_net(&positive, opts)?;
    let mesh = positive.mesh_norm();
    let problem = full_sphere_problem(Objective::Schaffer, Sense::Min, &positive, &signed);
    let out = solve(space, &problem, opts, &mut new_budget(opts))?;
    Ok(infimum(
        ConstantKind::Schaffer,
        &out,
        2.0 * mesh,
        mesh,
        1.0,
        2.0,
        opts,
    ))
}

/// `J(X) = sup{min{‖x − y‖, ‖x + y‖} : x, y ∈ S}`.
pub fn james(space: &LatticeSpace, opts: &SearchOptions) -> Result<ConstantEstimate> {
    opts.validate()?;
    let positive = positive_net(space, opts)?;
    let signed = signed_net(&positive, opts)?;
    let mesh = positive.mesh_norm();
    let problem = full_sphere_problem(Objective::James, Sense::Max, &positive, &signed);
    let out = solve(space, &problem, opts, &mut new_budget(opts))?;
    Ok(supremum(
        ConstantKind::James,
        &out,
        2.0 * mesh,
        mesh,
        0.0,
        2.0,
        opts,
    ))
}

/// `left ≤ right` checked on certified intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLink {
    pub left: ConstantKind,
    pub right: ConstantKind,
    /// `left.upper ≤ right.lower + 2·(left.mesh + right.mesh)`.
    pub holds: bool,
    /// The intervals do not contradict the inequality: `left.lower ≤ right.upper`.
    pub consistent: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantBattery {
    pub lambda: ConstantEstimate,
    pub lambda_plus: ConstantEstimate,
    pub beta: ConstantEstimate,
    pub alpha: ConstantEstimate,
    pub james: ConstantEstimate,
    pub chain: Vec<ChainLink>,
    pub chain_holds: bool,
    /// `β − λ⁺` on estimates.
    pub beta_gap: f64,
}

fn link(left: &ConstantEstimate, right: &ConstantEstimate) -> ChainLink {
    let slack = 2.0 * (left.mesh_norm + right.mesh_norm);
    let margin = right.lower + slack - left.upper;
    ChainLink {
        left: left.kind,
        right: right.kind,
        holds: margin >= 0.0,
        consistent: left.lower <= right.upper + 1e-9,
        margin,
    }
}

/// All five constants and the chain `λ ≤ λ⁺ ≤ β ≤ α ≤ J`.
pub fn constant_battery(space: &LatticeSpace, opts: &SearchOptions) -> Result<ConstantBattery> {
    require_support_dims(space, "constant battery")?;
    let lambda = lambda_schaffer(space, opts)?;
    let lambda_plus = lambda_plus(space, opts)?;
    let beta = beta(space, opts)?;
    let alpha = alpha(space, opts)?;
    let james = james(space, opts)?;
    let chain = vec![
        link(&lambda, &lambda_plus),
        link(&lambda_plus, &beta),
        link(&beta, &alpha),
        link(&alpha, &james),
    ];
    let chain_holds = chain.iter().all(|l| l.holds);
    let beta_gap = beta.estimate - lambda_plus.estimate;
    Ok(ConstantBattery {
        lambda,
        lambda_plus,
        beta,
        alpha,
        james,
        chain,
        chain_holds,
        beta_gap,
    })
}
