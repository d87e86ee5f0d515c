//! Budgeted target-set selection: pick at most `k` agents and set their
//! resistances to move the total equilibrium opinion.
//!
//! The workhorse is a greedy heuristic. Evaluating a candidate means
//! re-solving the equilibrium with one agent's resistance changed — a rank-one
//! modification of the system matrix — so each candidate costs `O(deg·n)`
//! against a maintained inverse instead of a fresh `O(n³)` solve. The inverse
//! is refreshed by full refactorization after every commitment to keep error
//! from drifting across rounds.

use crate::equilibrium::{total_opinion, OpinionProfile};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::intervention::{BoxBounds, Direction, InterventionPlan};
use crate::linalg::lu_factor;
use rayon::prelude::*;

/// Enumeration budget for [`exhaustive_opt`].
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Greedy search state: the committed picks and the inverse of the system
/// matrix `M = I − (I−A')P` for the current resistance vector, plus the
/// cached column sums `t = Bᵀ1` and right-hand side `A's` that make rank-one
/// candidate evaluation cheap.
pub struct GreedyState {
    committed: Vec<(usize, f64)>,
    alpha: Vec<f64>,
    base_inverse: Vec<f64>,
    col_sums: Vec<f64>,
    a_s: Vec<f64>,
    current_objective: f64,
}

impl GreedyState {
    /// State with nothing committed: the profile's own resistances.
    pub fn new(g: &Graph, p: &OpinionProfile) -> Result<Self> {
        if p.len() != g.node_count() {
            return Err(Error::contract(format!(
                "profile has {} nodes but graph has {}",
                p.len(),
                g.node_count()
            )));
        }
        let mut state = GreedyState {
            committed: Vec::new(),
            alpha: p.alpha().to_vec(),
            base_inverse: Vec::new(),
            col_sums: Vec::new(),
            a_s: Vec::new(),
            current_objective: 0.0,
        };
        state.refresh(g, p)?;
        Ok(state)
    }

    /// Rebuild the inverse and caches from the current resistance vector.
    fn refresh(&mut self, g: &Graph, p: &OpinionProfile) -> Result<()> {
        let n = g.node_count();
        let lu = lu_factor(crate::equilibrium::system_matrix(g, &self.alpha), n)?;
        self.base_inverse = lu.inverse();
        self.col_sums = (0..n)
            .map(|j| (0..n).map(|i| self.base_inverse[i * n + j]).sum())
            .collect();
        self.a_s = (0..n).map(|i| self.alpha[i] * p.s()[i]).collect();
        self.current_objective =
            (0..n).map(|j| self.col_sums[j] * self.a_s[j]).sum();
        Ok(())
    }

    pub fn committed(&self) -> &[(usize, f64)] {
        &self.committed
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn base_inverse(&self) -> &[f64] {
        &self.base_inverse
    }

    pub fn current_objective(&self) -> f64 {
        self.current_objective
    }

    fn is_committed(&self, node: usize) -> bool {
        self.committed.iter().any(|&(v, _)| v == node)
    }

    /// Fix `node`'s resistance at `alpha` and refresh the inverse.
    pub fn commit(&mut self, g: &Graph, p: &OpinionProfile, node: usize, alpha: f64) -> Result<()> {
        if node >= g.node_count() {
            return Err(Error::contract(format!("node {node} out of range")));
        }
        if self.is_committed(node) {
            return Err(Error::contract(format!("node {node} is already committed")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::contract(format!("alpha = {alpha} is outside (0, 1]")));
        }
        self.committed.push((node, alpha));
        self.alpha[node] = alpha;
        self.refresh(g, p)
    }

    /// The row `r = p_iᵀ B` of walk-weighted inverse entries that both
    /// endpoint evaluations of candidate `i` share; `O(deg(i)·n)`.
    fn candidate_row(&self, g: &Graph, candidate: usize) -> Vec<f64> {
        let n = g.node_count();
        let inv_deg = 1.0 / g.degree(candidate) as f64;
        let mut r = vec![0.0; n];
        for &j in g.neighbors(candidate) {
            let row = &self.base_inverse[j * n..j * n + n];
            for (acc, &v) in r.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for v in r.iter_mut() {
            *v *= inv_deg;
        }
        r
    }

    /// Marginal gain of re-resisting `candidate` to `new_alpha` given a
    /// precomputed candidate row. See [`marginal_gain`] for the public entry.
    fn gain_with_row(
        &self,
        g: &Graph,
        p: &OpinionProfile,
        candidate: usize,
        new_alpha: f64,
        r: &[f64],
    ) -> f64 {
        let delta = new_alpha - self.alpha[candidate];
        if delta == 0.0 {
            return 0.0;
        }
        // M changes by δ·e_i p_iᵀ and the right-hand side by δ·s_i·e_i;
        // Sherman-Morrison gives the objective change in closed form:
        //   gain = δ·s_i·t_i − (δ·t_i / (1 + δ·r_i)) · (rᵀ(A s) + δ·s_i·r_i)
        let s_i = p.s()[candidate];
        let t_i = self.col_sums[candidate];
        let denom = 1.0 + delta * r[candidate];
        if denom.abs() < 1e-12 {
            // Cannot happen for a feasible resistance (the updated matrix
            // stays strictly diagonally dominant) but guard with the slow
            // path anyway.
            let mut alpha = self.alpha.clone();
            alpha[candidate] = new_alpha;
            let p_mod = OpinionProfile::new(p.s().to_vec(), alpha)
                .expect("feasible alpha change keeps the profile valid");
            return total_opinion(g, &p_mod).expect("diagonally dominant system")
                - self.current_objective;
        }
        let r_dot_as: f64 = r.iter().zip(&self.a_s).map(|(a, b)| a * b).sum();
        delta * s_i * t_i - (delta * t_i / denom) * (r_dot_as + delta * s_i * r[candidate])
    }
}

/// `f(committed ∪ {candidate at new_alpha}) − f(committed)`, evaluated as a
/// rank-one update of the maintained inverse in `O(deg·n)`.
pub fn marginal_gain(
    state: &GreedyState,
    g: &Graph,
    p: &OpinionProfile,
    candidate: usize,
    new_alpha: f64,
) -> Result<f64> {
    if p.len() != g.node_count() || state.alpha.len() != g.node_count() {
        return Err(Error::contract("graph, profile and state sizes disagree".to_string()));
    }
    if candidate >= g.node_count() {
        return Err(Error::contract(format!("candidate {candidate} out of range")));
    }
    if state.is_committed(candidate) {
        return Err(Error::contract(format!("candidate {candidate} is already committed")));
    }
    if !(new_alpha > 0.0 && new_alpha <= 1.0) {
        return Err(Error::contract(format!("alpha = {new_alpha} is outside (0, 1]")));
    }
    let r = state.candidate_row(g, candidate);
    Ok(state.gain_with_row(g, p, candidate, new_alpha, &r))
}

/// Greedy selection of `min(k, n)` nodes. Each round evaluates both endpoint
/// resistances `{ℓ, u}` for every uncommitted candidate via rank-one updates
/// and commits the best; if even the best choice strictly hurts, the chosen
/// node keeps its original resistance (gain 0) and still counts toward the
/// budget. Ties go to the smallest node id, then to the endpoint `u`.
pub fn greedy_select(
    g: &Graph,
    p: &OpinionProfile,
    b: &BoxBounds,
    k: usize,
    direction: Direction,
) -> Result<InterventionPlan> {
    if k < 1 {
        return Err(Error::contract("budget k must be at least 1".to_string()));
    }
    let n = g.node_count();
    let rounds = k.min(n);
    let sign = direction.sign();
    let mut state = GreedyState::new(g, p)?;
    let baseline_objective = total_opinion(g, p)?;
    for _ in 0..rounds {
        let candidates: Vec<usize> = (0..n).filter(|&v| !state.is_committed(v)).collect();
        // (node, alpha, signed gain) per candidate; parallel evaluation, then
        // a sequential reduction in node order so ties resolve identically
        // regardless of scheduling.
        let evaluated: Vec<(usize, f64, f64)> = candidates
            .par_iter()
            .map(|&v| {
                let r = state.candidate_row(g, v);
                let gain_l = sign * state.gain_with_row(g, p, v, b.lower(), &r);
                let gain_u = sign * state.gain_with_row(g, p, v, b.upper(), &r);
                if gain_u <= gain_l {
                    (v, b.upper(), gain_u)
                } else {
                    (v, b.lower(), gain_l)
                }
            })
            .collect();
        let &(node, alpha, signed_gain) = evaluated
            .iter()
            .reduce(|best, cur| if cur.2 < best.2 { cur } else { best })
            .expect("at least one candidate per round");
        if signed_gain > 0.0 {
            // Both endpoints hurt; keep the original resistance.
            let original = p.alpha()[node];
            state.commit(g, p, node, original)?;
        } else {
            state.commit(g, p, node, alpha)?;
        }
    }
    let mut target_set: Vec<usize> = state.committed.iter().map(|&(v, _)| v).collect();
    target_set.sort_unstable();
    let assigned = OpinionProfile::new(p.s().to_vec(), state.alpha.clone())?;
    Ok(InterventionPlan {
        direction,
        target_set,
        alpha_assigned: state.alpha,
        objective: total_opinion(g, &assigned)?,
        baseline_objective,
        solver_trace: None,
    })
}

/// Baseline I: the `k` agents with the highest innate opinions, ties broken
/// by smallest node id. Returned ascending.
pub fn baseline_top_opinion(p: &OpinionProfile, k: usize) -> Result<Vec<usize>> {
    if k < 1 || k > p.len() {
        return Err(Error::contract(format!(
            "budget k = {k} is outside [1, {}]",
            p.len()
        )));
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        p.s()[b].partial_cmp(&p.s()[a]).expect("opinions are finite").then(a.cmp(&b))
    });
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Baseline II: top `k` by the degree-and-relative-opinion score
/// `(deg(i)/2m) · s_i / Σ_{j∈N(i)} s_j`. Agents whose neighbors' opinions sum
/// to zero count as infinite-score and rank first (among themselves by
/// descending opinion, then id); remaining ties break by id. Ascending.
pub fn baseline_score(g: &Graph, p: &OpinionProfile, k: usize) -> Result<Vec<usize>> {
    if p.len() != g.node_count() {
        return Err(Error::contract("profile does not match graph".to_string()));
    }
    if k < 1 || k > p.len() {
        return Err(Error::contract(format!(
            "budget k = {k} is outside [1, {}]",
            p.len()
        )));
    }
    let two_m = (2 * g.edge_count()) as f64;
    // Sort key: finite-class flag, then the class's own descending measure.
    let keys: Vec<(bool, f64)> = (0..p.len())
        .map(|i| {
            let neighbor_sum: f64 = g.neighbors(i).iter().map(|&j| p.s()[j]).sum();
            if neighbor_sum == 0.0 {
                (false, p.s()[i])
            } else {
                (true, (g.degree(i) as f64 / two_m) * p.s()[i] / neighbor_sum)
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .0
            .cmp(&keys[b].0)
            .then(keys[b].1.partial_cmp(&keys[a].1).expect("scores are finite"))
            .then(a.cmp(&b))
    });
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Best endpoint assignment over a fixed target set: tries all `2^|T|` ways
/// of setting the members to `ℓ` or `u` (everyone else keeps their original
/// resistance) and returns the winning full resistance vector with its
/// objective.
pub fn optimize_subset(
    g: &Graph,
    p: &OpinionProfile,
    b: &BoxBounds,
    subset: &[usize],
    direction: Direction,
) -> Result<(Vec<f64>, f64)> {
    if p.len() != g.node_count() {
        return Err(Error::contract("profile does not match graph".to_string()));
    }
    let mut seen = vec![false; p.len()];
    for &v in subset {
        if v >= p.len() {
            return Err(Error::contract(format!("subset node {v} out of range")));
        }
        if seen[v] {
            return Err(Error::contract(format!("subset node {v} repeated")));
        }
        seen[v] = true;
    }
    if subset.len() >= 64 {
        return Err(Error::Oversized { count: u128::MAX, limit: EXHAUSTIVE_LIMIT });
    }
    let sign = direction.sign();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u64..(1u64 << subset.len()) {
        let mut alpha = p.alpha().to_vec();
        for (bit, &v) in subset.iter().enumerate() {
            alpha[v] = if mask >> bit & 1 == 1 { b.upper() } else { b.lower() };
        }
        let trial = OpinionProfile::new(p.s().to_vec(), alpha.clone())?;
        let f = total_opinion(g, &trial)?;
        if best.as_ref().is_none_or(|(_, fb)| sign * f < sign * fb) {
            best = Some((alpha, f));
        }
    }
    Ok(best.expect("at least the empty assignment"))
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Total number of endpoint assignments [`exhaustive_opt`] would visit:
/// `Σ_{j=1..k} C(n,j)·2^j`, saturating.
pub fn exhaustive_count(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    for j in 1..=k.min(n) as u128 {
        let term = binomial(n as u128, j).saturating_mul(1u128.checked_shl(j as u32).unwrap_or(u128::MAX));
        total = total.saturating_add(term);
    }
    total
}

/// Exact oracle: enumerate every target set of size 1..=min(k, n) and every
/// endpoint assignment of its members, and keep the best. Refuses instances
/// whose enumeration count exceeds [`EXHAUSTIVE_LIMIT`].
pub fn exhaustive_opt(
    g: &Graph,
    p: &OpinionProfile,
    b: &BoxBounds,
    k: usize,
    direction: Direction,
) -> Result<InterventionPlan> {
    if k < 1 {
        return Err(Error::contract("budget k must be at least 1".to_string()));
    }
    if p.len() != g.node_count() {
        return Err(Error::contract("profile does not match graph".to_string()));
    }
    let n = g.node_count();
    let k = k.min(n);
    let count = exhaustive_count(n, k);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::Oversized { count, limit: EXHAUSTIVE_LIMIT });
    }
    let baseline_objective = total_opinion(g, p)?;
    let sign = direction.sign();
    let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    let mut subset = Vec::with_capacity(k);
    // Depth-first enumeration of subsets in lexicographic order.
    #[allow(clippy::too_many_arguments)] // recursion state threaded explicitly
    fn visit(
        g: &Graph,
        p: &OpinionProfile,
        b: &BoxBounds,
        direction: Direction,
        sign: f64,
        start: usize,
        k: usize,
        subset: &mut Vec<usize>,
        best: &mut Option<(Vec<usize>, Vec<f64>, f64)>,
    ) -> Result<()> {
        for v in start..g.node_count() {
            subset.push(v);
            let (alpha, f) = optimize_subset(g, p, b, subset, direction)?;
            if best.as_ref().is_none_or(|(_, _, fb)| sign * f < sign * fb) {
                *best = Some((subset.clone(), alpha, f));
            }
            if subset.len() < k {
                visit(g, p, b, direction, sign, v + 1, k, subset, best)?;
            }
            subset.pop();
        }
        Ok(())
    }
    visit(g, p, b, direction, sign, 0, k, &mut subset, &mut best)?;
    let (target_set, alpha_assigned, objective) = best.expect("n >= 1 yields candidates");
    Ok(InterventionPlan {
        direction,
        target_set,
        alpha_assigned,
        objective,
        baseline_objective,
        solver_trace: None,
    })
}
