//! Exact optimization over pairs of net points, and local refinement.
//!
//! The net stage is a dual-tree branch and bound. Each tree node carries the
//! coordinatewise bounding box of its points; because every norm used here
//! is a lattice norm, the box gives an enclosure of the objective on a whole
//! cell pair. A cell pair is discarded only when its bound is strictly worse
//! than the incumbent, or ties it and cannot hold a lexicographically smaller
//! witness, so the reported optimum is the exact extremum over all net pairs
//! with the tie-break applied.

use std::cmp::Ordering;

use crate::net::SphereNet;
use crate::space::LatticeSpace;

const LEAF_SIZE: usize = 16;
/// Relative width under which two objective values count as a tie.
const TIE: f64 = 1e-12;
/// Root-finding width for the radius objective.
const RADIUS_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Min,
    Max,
}

impl Sense {
    /// Values are mapped to keys that are always minimized.
    fn sign(self) -> f64 {
        match self {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Objective {
    /// `‖x + c·y‖`.
    Sum { c: f64 },
    /// `‖x − y‖`.
    Diff,
    /// `max{‖x − y‖, ‖x + y‖}`.
    Schaffer,
    /// `min{‖x − y‖, ‖x + y‖}`.
    James,
    /// `sup{r ∈ [0,1] : ‖r·x + eps·y‖ ≤ 1}` for positive `x`, `y`.
    Radius { eps: f64 },
}

impl Objective {
    /// Symmetric in `x` and `y`.
    fn symmetric(self) -> bool {
        matches!(
            self,
            Objective::Sum { c } if c == 1.0
        ) || matches!(self, Objective::Diff | Objective::Schaffer | Objective::James)
    }
}

pub(crate) struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            a: vec![0.0; dim],
            b: vec![0.0; dim],
        }
    }
}

/// `‖a·x + b·y‖`.
#[inline]
fn combo(space: &LatticeSpace, a: f64, x: &[f64], b: f64, y: &[f64], buf: &mut [f64]) -> f64 {
    for ((o, u), v) in buf.iter_mut().zip(x).zip(y) {
        *o = a * u + b * v;
    }
    space.eval(buf)
}

/// Coordinate intervals of `a·X + b·Y` for boxes `X`, `Y`.
#[inline]
fn interval(a: f64, xl: f64, xh: f64, b: f64, yl: f64, yh: f64) -> (f64, f64) {
    let (p, q) = if a >= 0.0 { (a * xl, a * xh) } else { (a * xh, a * xl) };
    let (r, t) = if b >= 0.0 { (b * yl, b * yh) } else { (b * yh, b * yl) };
    (p + r, q + t)
}

/// A lower bound of `‖a·x + b·y‖` over `x ∈ X`, `y ∈ Y`: the norm of the
/// smallest modulus each coordinate can take.
fn enclose_low(space: &LatticeSpace, a: f64, xb: Bx, b: f64, yb: Bx, buf: &mut [f64]) -> f64 {
    for (i, o) in buf.iter_mut().enumerate() {
        let (lo, hi) = interval(a, xb.0[i], xb.1[i], b, yb.0[i], yb.1[i]);
        *o = if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        };
    }
    space.eval(buf)
}

/// An upper bound of `‖a·x + b·y‖` over the boxes.
fn enclose_high(space: &LatticeSpace, a: f64, xb: Bx, b: f64, yb: Bx, buf: &mut [f64]) -> f64 {
    for (i, o) in buf.iter_mut().enumerate() {
        let (lo, hi) = interval(a, xb.0[i], xb.1[i], b, yb.0[i], yb.1[i]);
        *o = lo.abs().max(hi.abs());
    }
    space.eval(buf)
}

type Bx<'a> = (&'a [f64], &'a [f64]);

/// `sup{r ∈ [0,1] : ‖r·x + eps·y‖ ≤ 1}` for `0 ≤ x`, `0 ≤ y`, `‖x‖, ‖y‖ ≤ 1`.
///
/// Returns the feasible end of the final bracket, or the infeasible end when
/// `upper` is set (an enclosure from above).
pub(crate) fn radius(
    space: &LatticeSpace,
    x: &[f64],
    y: &[f64],
    eps: f64,
    buf: &mut [f64],
    upper: bool,
) -> f64 {
    let mut f = |r: f64| combo(space, r, x, eps, y, buf) - 1.0;
    let mut fhi = f(1.0);
    if fhi <= 0.0 {
        return 1.0;
    }
    let mut hi = 1.0;
    // ‖(1−ε)x + εy‖ ≤ 1 by the triangle inequality.
    let mut lo = 1.0 - eps;
    let mut flo = f(lo);
    if flo > 0.0 {
        lo = 0.0;
        flo = f(0.0);
        if flo > 0.0 {
            return if upper { hi } else { 0.0 };
        }
    }
    // Illinois regula falsi, safeguarded by bisection whenever two steps in
    // a row fail to halve the bracket; f(lo) ≤ 0 < f(hi) throughout.
    let mut side = 0i8;
    let mut probed = false;
    let mut slow = 0;
    for _ in 0..200 {
        let width = hi - lo;
        if width <= RADIUS_TOL {
            break;
        }
        let c = if flo > -1e-15 && !probed {
            // lo is (numerically) the root; test just past it.
            probed = true;
            (lo + RADIUS_TOL).min(0.5 * (lo + hi))
        } else if slow >= 2 {
            probed = false;
            slow = 0;
            0.5 * (lo + hi)
        } else {
            probed = false;
            let s = lo - flo * (hi - lo) / (fhi - flo);
            if s > lo && s < hi {
                s
            } else {
                0.5 * (lo + hi)
            }
        };
        let fc = f(c);
        if fc <= 0.0 {
            lo = c;
            flo = fc;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            fhi = fc;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * width {
            slow += 1;
        } else {
            slow = 0;
        }
    }
    if upper {
        hi
    } else {
        lo
    }
}

impl Objective {
    pub(crate) fn value(self, space: &LatticeSpace, x: &[f64], y: &[f64], s: &mut Scratch) -> f64 {
        match self {
            Objective::Sum { c } => combo(space, 1.0, x, c, y, &mut s.a),
            Objective::Diff => combo(space, 1.0, x, -1.0, y, &mut s.a),
            Objective::Schaffer => {
                combo(space, 1.0, x, -1.0, y, &mut s.a).max(combo(space, 1.0, x, 1.0, y, &mut s.a))
            }
            Objective::James => {
                combo(space, 1.0, x, -1.0, y, &mut s.a).min(combo(space, 1.0, x, 1.0, y, &mut s.a))
            }
            Objective::Radius { eps } => radius(space, x, y, eps, &mut s.a, false),
        }
    }

    /// A bound on the objective over the box pair, on the side that matters
    /// for `sense` (below for `Min`, above for `Max`).
    fn bound(self, sense: Sense, space: &LatticeSpace, xb: Bx, yb: Bx, s: &mut Scratch) -> f64 {
        let low = |a: f64, b: f64, s: &mut Scratch| enclose_low(space, a, xb, b, yb, &mut s.b);
        let high = |a: f64, b: f64, s: &mut Scratch| enclose_high(space, a, xb, b, yb, &mut s.b);
        match (self, sense) {
            (Objective::Sum { c }, Sense::Min) => low(1.0, c, s),
            (Objective::Sum { c }, Sense::Max) => high(1.0, c, s),
            (Objective::Diff, Sense::Min) => low(1.0, -1.0, s),
            (Objective::Diff, Sense::Max) => high(1.0, -1.0, s),
            (Objective::Schaffer, Sense::Min) => low(1.0, -1.0, s).max(low(1.0, 1.0, s)),
            (Objective::Schaffer, Sense::Max) => high(1.0, -1.0, s).max(high(1.0, 1.0, s)),
            (Objective::James, Sense::Min) => low(1.0, -1.0, s).min(low(1.0, 1.0, s)),
            (Objective::James, Sense::Max) => high(1.0, -1.0, s).min(high(1.0, 1.0, s)),
            // R decreases as x and y grow.
            (Objective::Radius { eps }, Sense::Max) => radius(space, xb.0, yb.0, eps, &mut s.b, true),
            (Objective::Radius { eps }, Sense::Min) => radius(space, xb.1, yb.1, eps, &mut s.b, false),
        }
    }
}

/// A k-d tree over the points of a net.
pub(crate) struct Tree {
    dim: usize,
    /// Points in tree order.
    coords: Vec<f64>,
    nodes: Vec<Node>,
    /// Per node, `dim` entries each.
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Node {
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

impl Tree {
    pub(crate) fn new(net: &SphereNet) -> Self {
        let dim = net.dim();
        let mut order: Vec<usize> = (0..net.len()).collect();
        let mut tree = Tree {
            dim,
            coords: Vec::with_capacity(net.len() * dim),
            nodes: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
        };
        tree.build(net, &mut order, 0);
        for &i in &order {
            tree.coords.extend_from_slice(net.point(i));
        }
        tree
    }

    fn build(&mut self, net: &SphereNet, order: &mut [usize], offset: usize) -> usize {
        let d = self.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in order.iter() {
            for (k, v) in net.point(i).iter().enumerate() {
                lo[k] = lo[k].min(*v);
                hi[k] = hi[k].max(*v);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            start: offset,
            end: offset + order.len(),
            children: None,
        });
        let axis = (0..d)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap_or(0);
        let wide = hi[axis] > lo[axis];
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);
        if order.len() > LEAF_SIZE && wide {
            order.sort_by(|&a, &b| {
                net.point(a)[axis]
                    .total_cmp(&net.point(b)[axis])
                    .then(a.cmp(&b))
            });
            let mid = order.len() / 2;
            let (left, right) = order.split_at_mut(mid);
            let l = self.build(net, left, offset);
            let r = self.build(net, right, offset + mid);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn bx(&self, node: usize) -> Bx<'_> {
        let r = node * self.dim..(node + 1) * self.dim;
        (&self.lo[r.clone()], &self.hi[r])
    }

    fn len(&self, node: usize) -> usize {
        self.nodes[node].end - self.nodes[node].start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Candidate {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub(crate) struct NetOptimum {
    pub best: Candidate,
    /// The best pairs seen, best first; `starts[0]` is `best`.
    pub starts: Vec<Candidate>,
    pub evaluations: u64,
}

/// Running count of objective evaluations against a hard limit.
pub(crate) struct Budget {
    pub limit: u64,
    pub used: u64,
}

/// The budget ran out before the net stage finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Exhausted;

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (u, v) in a.iter().zip(b) {
        match u.total_cmp(v) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

struct State<'t> {
    xs: &'t Tree,
    ys: &'t Tree,
    keep: usize,
    /// (key, x index, y index), best first.
    top: Vec<(f64, usize, usize)>,
}

impl State<'_> {
    fn best(&self) -> Option<(f64, usize, usize)> {
        self.top.first().copied()
    }

    fn pair_cmp(&self, a: (usize, usize), b: (usize, usize)) -> Ordering {
        lex(self.xs.point(a.0), self.xs.point(b.0))
            .then_with(|| lex(self.ys.point(a.1), self.ys.point(b.1)))
    }

    fn offer(&mut self, key: f64, i: usize, j: usize) {
        if let Some((bk, bi, bj)) = self.best() {
            let tie = TIE * (1.0 + bk.abs());
            let better = key < bk - tie
                || (key <= bk + tie && self.pair_cmp((i, j), (bi, bj)) == Ordering::Less);
            if better {
                self.top.insert(0, (key, i, j));
                self.top.truncate(self.keep);
                return;
            }
            // Lower-ranked starting points.
            if self.top.len() < self.keep || key < self.top[self.top.len() - 1].0 {
                let pos = self.top[1..]
                    .iter()
                    .position(|t| key < t.0)
                    .map_or(self.top.len(), |p| p + 1);
                self.top.insert(pos, (key, i, j));
                self.top.truncate(self.keep);
            }
        } else {
            self.top.push((key, i, j));
        }
    }

    /// Whether a cell pair with key bound `kb` and lexicographic floor
    /// `floor` for its first component can be skipped.
    fn prunable(&self, kb: f64, floor: &[f64]) -> bool {
        match self.best() {
            None => false,
            Some((bk, bi, _)) => {
                let tie = TIE * (1.0 + bk.abs());
                kb > bk + tie
                    || (kb > bk - tie && lex(floor, self.xs.point(bi)) == Ordering::Greater)
            }
        }
    }
}

/// The exact optimum of `objective` over pairs `(x, y)` with `x` from
/// `xs` and `y` from `ys`. With `ys = None` the pairs are drawn from `xs`
/// twice and only unordered pairs are visited; the objective must then be
/// symmetric.
pub(crate) fn optimize_pairs(
    space: &LatticeSpace,
    objective: Objective,
    sense: Sense,
    xs: &Tree,
    ys: Option<&Tree>,
    keep: usize,
    budget: &mut Budget,
) -> Result<NetOptimum, Exhausted> {
    let symmetric = ys.is_none();
    debug_assert!(!symmetric || objective.symmetric());
    let ys = ys.unwrap_or(xs);
    let sign = sense.sign();
    let mut scratch = Scratch::new(space.dim());
    let mut state = State {
        xs,
        ys,
        keep: keep.max(1),
        top: Vec::new(),
    };
    let start_used = budget.used;

    let floor_of = |a: usize, b: usize| -> Vec<f64> {
        let la = xs.bx(a).0;
        if symmetric {
            let lb = ys.bx(b).0;
            if lex(la, lb) == Ordering::Greater {
                return lb.to_vec();
            }
        }
        la.to_vec()
    };

    let root_bound = sign * objective.bound(sense, space, xs.bx(0), ys.bx(0), &mut scratch);
    let mut stack = vec![(0usize, 0usize, root_bound)];
    while let Some((a, b, kb)) = stack.pop() {
        if state.prunable(kb, &floor_of(a, b)) {
            continue;
        }
        let na = xs.nodes[a];
        let nb = ys.nodes[b];
        let same = symmetric && a == b;
        let children: Vec<(usize, usize)> = match (na.children, nb.children) {
            (None, None) => {
                let mut count = 0u64;
                for i in na.start..na.end {
                    let from = if same { i } else { nb.start };
                    for j in from..nb.end {
                        let (x, y) = (xs.point(i), ys.point(j));
                        let key = sign * objective.value(space, x, y, &mut scratch);
                        // Symmetric pairs are compared in their canonical
                        // orientation.
                        if symmetric && lex(x, y) == Ordering::Greater {
                            state.offer(key, j, i);
                        } else {
                            state.offer(key, i, j);
                        }
                        count += 1;
                    }
                }
                budget.used += count;
                if budget.used > budget.limit {
                    return Err(Exhausted);
                }
                continue;
            }
            _ if same => {
                let (l, r) = na.children.expect("same node is internal");
                vec![(l, l), (l, r), (r, r)]
            }
            (Some((l, r)), None) => vec![(l, b), (r, b)],
            (None, Some((l, r))) => vec![(a, l), (a, r)],
            (Some((al, ar)), Some((bl, br))) => {
                if xs.len(a) >= ys.len(b) {
                    vec![(al, b), (ar, b)]
                } else {
                    vec![(a, bl), (a, br)]
                }
            }
        };
        let mut scored: Vec<(f64, Vec<f64>, usize, usize)> = children
            .into_iter()
            .map(|(c, d)| {
                let kb = sign * objective.bound(sense, space, xs.bx(c), ys.bx(d), &mut scratch);
                (kb, floor_of(c, d), c, d)
            })
            .collect();
        // Best child popped first.
        scored.sort_by(|p, q| q.0.total_cmp(&p.0).then_with(|| lex(&q.1, &p.1)));
        for (kb, floor, c, d) in scored {
            if !state.prunable(kb, &floor) {
                stack.push((c, d, kb));
            }
        }
    }

    let to_candidate = |&(key, i, j): &(f64, usize, usize)| Candidate {
        value: sign * key,
        x: xs.point(i).to_vec(),
        y: ys.point(j).to_vec(),
    };
    let starts: Vec<Candidate> = state.top.iter().map(to_candidate).collect();
    Ok(NetOptimum {
        best: starts[0].clone(),
        starts,
        evaluations: budget.used - start_used,
    })
}

/// How a refinement may move each argument.
#[derive(Debug, Clone)]
pub(crate) struct Domain {
    pub x_support: Vec<usize>,
    pub y_support: Vec<usize>,
    /// Arguments the refinement may move off the positive cone.
    pub x_signed: bool,
    pub y_signed: bool,
}

impl Domain {
    pub(crate) fn positive(dim: usize) -> Self {
        Self {
            x_support: (0..dim).collect(),
            y_support: (0..dim).collect(),
            x_signed: false,
            y_signed: false,
        }
    }
}

/// Pattern search from `start`, polling `±e_k` and `±e_k ± e_l` in the
/// unnormalized coordinates of both arguments, halving the step from
/// `step` until it drops below `tol`. Both arguments are kept on the unit
/// sphere, restricted to their supports and (unless signed) positive.
/// Never returns a worse pair than `start`.
pub(crate) fn refine(
    space: &LatticeSpace,
    objective: Objective,
    sense: Sense,
    domain: &Domain,
    start: &Candidate,
    step: f64,
    tol: f64,
) -> Candidate {
    const MAX_EVALS: usize = 400_000;
    let n = space.dim();
    let sign = sense.sign();
    let mut scratch = Scratch::new(n);
    let kx = domain.x_support.len();
    let m = kx + domain.y_support.len();
    let mut theta: Vec<f64> = domain
        .x_support
        .iter()
        .map(|&i| start.x[i])
        .chain(domain.y_support.iter().map(|&i| start.y[i]))
        .collect();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];

    // Decodes θ onto the spheres; None when an argument vanishes.
    let decode = |theta: &[f64], x: &mut [f64], y: &mut [f64]| -> bool {
        x.iter_mut().for_each(|v| *v = 0.0);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (k, &i) in domain.x_support.iter().enumerate() {
            x[i] = theta[k];
        }
        for (k, &i) in domain.y_support.iter().enumerate() {
            y[i] = theta[kx + k];
        }
        let nx = space.eval(x);
        let ny = space.eval(y);
        if !(nx > 0.0 && ny > 0.0) {
            return false;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        y.iter_mut().for_each(|v| *v /= ny);
        true
    };

    let mut directions: Vec<Vec<(usize, f64)>> = Vec::new();
    for k in 0..m {
        for s in [1.0, -1.0] {
            directions.push(vec![(k, s)]);
        }
    }
    for k in 0..m {
        for l in k + 1..m {
            for (s, t) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                directions.push(vec![(k, s), (l, t)]);
            }
        }
    }

    let mut best_key = sign * start.value;
    let mut best = start.clone();
    if decode(&theta, &mut x, &mut y) {
        let key = sign * objective.value(space, &x, &y, &mut scratch);
        // Re-evaluate at the decoded point so key and witness agree.
        best_key = key;
        best = Candidate {
            value: sign * key,
            x: x.clone(),
            y: y.clone(),
        };
        theta = refresh(domain, &best);
    }
    let mut h = step;
    let mut evals = 0usize;
    let mut trial = theta.clone();
    while h >= tol && evals < MAX_EVALS {
        let mut winner: Option<(f64, Vec<f64>)> = None;
        for dir in &directions {
            trial.copy_from_slice(&theta);
            let mut moved = false;
            for &(k, s) in dir {
                let mut v = trial[k] + s * h;
                let signed = if k < kx { domain.x_signed } else { domain.y_signed };
                if !signed && v < 0.0 {
                    v = 0.0;
                }
                if v != trial[k] {
                    moved = true;
                }
                trial[k] = v;
            }
            if !moved || !decode(&trial, &mut x, &mut y) {
                continue;
            }
            evals += 1;
            let key = sign * objective.value(space, &x, &y, &mut scratch);
            let incumbent = winner.as_ref().map_or(best_key, |w| w.0);
            if key < incumbent {
                winner = Some((key, trial.clone()));
            }
        }
        match winner {
            Some((key, t)) if key < best_key - 1e-15 * (1.0 + best_key.abs()) => {
                decode(&t, &mut x, &mut y);
                best_key = key;
                best = Candidate {
                    value: sign * key,
                    x: x.clone(),
                    y: y.clone(),
                };
                theta = refresh(domain, &best);
            }
            _ => h *= 0.5,
        }
    }
    if sign * best.value > sign * start.value {
        return start.clone();
    }
    best
}

/// Parameters of a normalized pair.
fn refresh(domain: &Domain, c: &Candidate) -> Vec<f64> {
    domain
        .x_support
        .iter()
        .map(|&i| c.x[i])
        .chain(domain.y_support.iter().map(|&i| c.y[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::net::SphereNet;

    fn brute(
        space: &LatticeSpace,
        objective: Objective,
        sense: Sense,
        xs: &SphereNet,
        ys: &SphereNet,
    ) -> f64 {
        let mut s = Scratch::new(space.dim());
        let sign = sense.sign();
        let mut best = f64::INFINITY;
        for x in xs.points() {
            for y in ys.points() {
                best = best.min(sign * objective.value(space, x, y, &mut s));
            }
        }
        sign * best
    }

    fn unlimited() -> Budget {
        Budget {
            limit: u64::MAX,
            used: 0,
        }
    }

    #[test]
    fn branch_and_bound_matches_brute_force() {
        let cases = [
            (Objective::Sum { c: 1.0 }, Sense::Min, true),
            (Objective::Sum { c: 0.3 }, Sense::Min, false),
            (Objective::Sum { c: 1.0 }, Sense::Max, true),
            (Objective::Diff, Sense::Max, true),
            (Objective::Radius { eps: 0.4 }, Sense::Max, false),
        ];
        for space in [
            catalog::counterexample_3d(),
            catalog::lp(1.5, 3),
            catalog::linf(3),
            catalog::lp(1.0, 3),
        ] {
            let net = SphereNet::positive(&space, 0.1).unwrap();
            let tree = Tree::new(&net);
            for (objective, sense, symmetric) in cases {
                let other = if symmetric { None } else { Some(&tree) };
                let got = optimize_pairs(&space, objective, sense, &tree, other, 3, &mut unlimited())
                    .unwrap();
                let want = brute(&space, objective, sense, &net, &net);
                assert!(
                    (got.best.value - want).abs() <= 1e-12,
                    "{objective:?} {sense:?}: {} vs {want}",
                    got.best.value
                );
            }
        }
    }

    #[test]
    fn signed_objectives_match_brute_force() {
        for space in [catalog::octagon(), catalog::lp(3.0, 2), catalog::counterexample_3d()] {
            let pos = SphereNet::positive(&space, 0.1).unwrap();
            let signed = pos.signed_orbits();
            let (tp, ts) = (Tree::new(&pos), Tree::new(&signed));
            for (objective, sense) in [(Objective::Schaffer, Sense::Min), (Objective::James, Sense::Max)] {
                let got = optimize_pairs(&space, objective, sense, &tp, Some(&ts), 1, &mut unlimited())
                    .unwrap();
                let want = brute(&space, objective, sense, &pos, &signed);
                assert!((got.best.value - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn ties_break_to_the_lexicographically_smallest_pair() {
        // On ℓ∞² every disjoint-ish pair with ‖x+y‖ = 1 ties.
        let space = catalog::linf(2);
        let net = SphereNet::positive(&space, 0.25).unwrap();
        let tree = Tree::new(&net);
        let got = optimize_pairs(
            &space,
            Objective::Sum { c: 1.0 },
            Sense::Min,
            &tree,
            None,
            1,
            &mut unlimited(),
        )
        .unwrap();
        let mut best: Option<(Vec<f64>, Vec<f64>)> = None;
        for x in net.points() {
            for y in net.points() {
                let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                if space.eval(&s) == 1.0 {
                    let (p, q) = if lex(x, y) == Ordering::Greater { (y, x) } else { (x, y) };
                    let cand = (p.to_vec(), q.to_vec());
                    if best.as_ref().is_none_or(|b| {
                        lex(&cand.0, &b.0).then(lex(&cand.1, &b.1)) == Ordering::Less
                    }) {
                        best = Some(cand);
                    }
                }
            }
        }
        let (bx, by) = best.unwrap();
        assert_eq!(got.best.value, 1.0);
        assert_eq!((got.best.x, got.best.y), (bx, by));
    }

    #[test]
    fn budget_is_enforced() {
        let space = catalog::lp(1.0, 3);
        let net = SphereNet::positive(&space, 0.1).unwrap();
        let tree = Tree::new(&net);
        let mut budget = Budget { limit: 1000, used: 0 };
        let r = optimize_pairs(&space, Objective::Sum { c: 1.0 }, Sense::Min, &tree, None, 1, &mut budget);
        assert_eq!(r.err(), Some(Exhausted));
    }

    #[test]
    fn radius_is_the_largest_feasible_scale() {
        let space = catalog::lp(2.0, 2);
        let mut buf = vec![0.0; 2];
        // ‖r e₁ + ε e₂‖₂ = 1 at r = √(1 − ε²).
        for eps in [0.0, 0.3, 0.7, 1.0] {
            let r = radius(&space, &[1.0, 0.0], &[0.0, 1.0], eps, &mut buf, false);
            let want = (1.0f64 - eps * eps).sqrt();
            // At ε = 1 the constraint is quadratically flat: r² < 2⁻⁵² is
            // feasible in floating point.
            let tol = if eps == 1.0 { 1e-7 } else { 1e-12 };
            assert!((r - want).abs() < tol, "{eps}: {r} vs {want}");
            let up = radius(&space, &[1.0, 0.0], &[0.0, 1.0], eps, &mut buf, true);
            assert!(up >= r && up - r <= 1e-12);
        }
        // ℓ₁: r + ε = 1 exactly on the bracket's left end.
        let l1 = catalog::lp(1.0, 2);
        let r = radius(&l1, &[0.5, 0.5], &[1.0, 0.0], 0.25, &mut buf, false);
        assert!((r - 0.75).abs() < 1e-12);
    }

    #[test]
    fn refinement_reaches_the_smooth_minimum() {
        // ‖x + 0.5y‖₂ on the positive sphere is least at disjoint x, y.
        let space = catalog::lp(2.0, 2);
        let s = |v: &[f64]| space.normalize(v);
        let start = Candidate {
            value: 0.0,
            x: s(&[1.0, 0.3]),
            y: s(&[0.2, 1.0]),
        };
        let mut scratch = Scratch::new(2);
        let obj = Objective::Sum { c: 0.5 };
        let start = Candidate {
            value: obj.value(&space, &start.x, &start.y, &mut scratch),
            ..start
        };
        let out = refine(&space, obj, Sense::Min, &Domain::positive(2), &start, 0.05, 1e-10);
        assert!((out.value - 1.25f64.sqrt()).abs() < 1e-9, "{}", out.value);
        assert!(out.value <= start.value);
    }
}
