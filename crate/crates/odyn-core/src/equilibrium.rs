//! Equilibrium opinions: direct solve, fixed-point iteration, and a
//! Monte-Carlo absorbing-walk estimator.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, lu_factor};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Above this size the direct dense solve gives way to fixed-point iteration.
pub const DIRECT_SOLVE_MAX_N: usize = 4096;
/// Defaults for the fixed-point fallback inside [`solve_equilibrium`].
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITERS: usize = 1_000_000;
/// Hard cap on a single Monte-Carlo walk; hitting it is reported as an error.
pub const WALK_STEP_CAP: u64 = 10_000_000;

/// Innate opinions `s_i ∈ [0,1]` and resistances `α_i ∈ (0,1]`, validated at
/// construction.
#[derive(Debug, Clone)]
pub struct OpinionProfile {
    s: Vec<f64>,
    alpha: Vec<f64>,
}

impl OpinionProfile {
    pub fn new(s: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if s.len() != alpha.len() {
            return Err(Error::invalid(format!(
                "opinion vector has length {} but resistance vector has length {}",
                s.len(),
                alpha.len()
            )));
        }
        if s.is_empty() {
            return Err(Error::invalid("profile is empty"));
        }
        for (i, &v) in s.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::invalid(format!("s[{i}] = {v} is outside [0, 1]")));
            }
        }
        for (i, &v) in alpha.iter().enumerate() {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!("alpha[{i}] = {v} is outside (0, 1]")));
            }
        }
        Ok(OpinionProfile { s, alpha })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Same opinions with a different resistance vector.
    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        Self::new(self.s.clone(), alpha)
    }

    /// Parse a profile file: one line per node, `node_id s alpha`,
    /// tab- or space-separated, `#` comments. Every node in `[0, n)` must
    /// appear exactly once.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, f64, f64, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    line_no,
                    format!("expected `node s alpha`, found {} fields", fields.len()),
                ));
            }
            let node: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid node id {:?}", fields[0])))?;
            let s: f64 = fields[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid opinion {:?}", fields[1])))?;
            let alpha: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid resistance {:?}", fields[2])))?;
            rows.push((node, s, alpha, line_no));
        }
        if rows.is_empty() {
            return Err(Error::invalid("profile file has no data lines"));
        }
        let n = rows.len();
        let mut s = vec![f64::NAN; n];
        let mut alpha = vec![f64::NAN; n];
        for (node, sv, av, line_no) in rows {
            if node >= n {
                return Err(Error::parse(
                    line_no,
                    format!("node id {node} out of range for {n} data lines"),
                ));
            }
            if !s[node].is_nan() {
                return Err(Error::parse(line_no, format!("node {node} appears twice")));
            }
            s[node] = sv;
            alpha[node] = av;
        }
        Self::new(s, alpha)
    }

    /// Serialize as the profile file format accepted by [`from_tsv`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            out.push_str(&format!("{}\t{}\t{}\n", i, self.s[i], self.alpha[i]));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    FixedPoint,
    MonteCarlo,
}

/// An equilibrium computation: the expressed opinions `z`, the objective
/// `f = Σ z_i`, and how (and how well) they were obtained.
#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub z: Vec<f64>,
    pub objective: f64,
    pub method: Method,
    /// ∞-norm of `(I − (I−A)P) z − A s`.
    pub residual: f64,
    /// Update steps performed; 0 for the direct solve.
    pub iterations: usize,
    /// False only when fixed-point iteration stopped at its iteration cap.
    pub converged: bool,
}

fn check_dims(g: &Graph, p: &OpinionProfile) -> Result<()> {
    if p.len() != g.node_count() {
        return Err(Error::contract(format!(
            "profile has {} nodes but graph has {}",
            p.len(),
            g.node_count()
        )));
    }
    Ok(())
}

/// Dense system matrix `M = I − (I−A)P`, row-major.
pub(crate) fn system_matrix(g: &Graph, alpha: &[f64]) -> Vec<f64> {
    let n = g.node_count();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
        let w = (1.0 - alpha[i]) / g.degree(i) as f64;
        for &j in g.neighbors(i) {
            m[i * n + j] -= w;
        }
    }
    m
}

fn residual_inf(g: &Graph, p: &OpinionProfile, z: &[f64]) -> f64 {
    let pz = g.random_walk_apply(z).expect("dimension already checked");
    let mut r = 0.0f64;
    for i in 0..z.len() {
        let v = z[i] - (1.0 - p.alpha[i]) * pz[i] - p.alpha[i] * p.s[i];
        r = r.max(v.abs());
    }
    r
}

/// Solve `(I − (I−A)P) z = A s` for the equilibrium. Dense LU up to
/// [`DIRECT_SOLVE_MAX_N`] nodes, fixed-point iteration beyond that.
pub fn solve_equilibrium(g: &Graph, p: &OpinionProfile) -> Result<EquilibriumResult> {
    check_dims(g, p)?;
    let n = g.node_count();
    if n > DIRECT_SOLVE_MAX_N {
        let x0: Vec<f64> = (0..n).map(|i| p.alpha[i] * p.s[i]).collect();
        return iterate_dynamics(g, p, &x0, FIXED_POINT_TOL, FIXED_POINT_MAX_ITERS);
    }
    let a_s: Vec<f64> = (0..n).map(|i| p.alpha[i] * p.s[i]).collect();
    let lu = lu_factor(system_matrix(g, &p.alpha), n)?;
    let z = lu.solve(&a_s);
    let residual = residual_inf(g, p, &z);
    let tol = 1e-10 * linalg::inf_norm(&a_s).max(1.0);
    if residual > tol {
        return Err(Error::Solver(format!(
            "residual {residual:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(EquilibriumResult {
        objective: linalg::pairwise_sum(&z),
        z,
        method: Method::Direct,
        residual,
        iterations: 0,
        converged: true,
    })
}

/// Run the averaging dynamics from `x0` until successive iterates differ by
/// at most `tol` in the ∞-norm, or `max_iters` steps. Non-convergence is a
/// status on the result, not an error.
pub fn iterate_dynamics(
    g: &Graph,
    p: &OpinionProfile,
    x0: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<EquilibriumResult> {
    check_dims(g, p)?;
    if x0.len() != p.len() {
        return Err(Error::contract(format!(
            "initial vector has length {}, expected {}",
            x0.len(),
            p.len()
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::contract(format!("tolerance must be positive and finite, got {tol}")));
    }
    if max_iters < 1 {
        return Err(Error::contract("max_iters must be at least 1".to_string()));
    }
    let mut x = x0.to_vec();
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iters {
        let px = g.random_walk_apply(&x)?;
        let mut delta = 0.0f64;
        for i in 0..x.len() {
            let next = p.alpha[i] * p.s[i] + (1.0 - p.alpha[i]) * px[i];
            delta = delta.max((next - x[i]).abs());
            x[i] = next;
        }
        iterations += 1;
        if delta <= tol {
            converged = true;
            break;
        }
    }
    Ok(EquilibriumResult {
        objective: linalg::pairwise_sum(&x),
        residual: residual_inf(g, p, &x),
        z: x,
        method: Method::FixedPoint,
        iterations,
        converged,
    })
}

/// Estimate `z_node` by absorbing random walks: from `node`, absorb at the
/// current node `j` with probability `α_j` (collecting `s_j`), otherwise step
/// to a uniformly random neighbor. Returns `(mean, standard error)`.
///
/// Each walk draws from its own stream keyed by `(seed, walk index)` and the
/// reduction is a fixed-order pairwise sum, so the result is identical no
/// matter how walks are scheduled across threads.
pub fn mc_estimate(
    g: &Graph,
    p: &OpinionProfile,
    node: usize,
    walks: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_dims(g, p)?;
    if node >= g.node_count() {
        return Err(Error::contract(format!(
            "start node {node} out of range for {} nodes",
            g.node_count()
        )));
    }
    if walks < 1 {
        return Err(Error::contract("walk count must be at least 1".to_string()));
    }
    let values: Vec<f64> = (0..walks as u64)
        .into_par_iter()
        .map(|walk| {
            let mut key = [0u8; 32];
            key[..8].copy_from_slice(&seed.to_le_bytes());
            key[8..16].copy_from_slice(&walk.to_le_bytes());
            let mut rng = ChaCha8Rng::from_seed(key);
            let mut cur = node;
            for _ in 0..WALK_STEP_CAP {
                if rng.random::<f64>() < p.alpha[cur] {
                    return Ok(p.s[cur]);
                }
                let nb = g.neighbors(cur);
                cur = nb[rng.random_range(0..nb.len())];
            }
            Err(Error::WalkCap { cap: WALK_STEP_CAP })
        })
        .collect::<Result<_>>()?;
    let mean = linalg::pairwise_sum(&values) / walks as f64;
    let stderr = if walks > 1 {
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        (linalg::pairwise_sum(&sq) / (walks - 1) as f64).sqrt() / (walks as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

/// The objective `f(s, α) = Σ_i z_i`.
pub fn total_opinion(g: &Graph, p: &OpinionProfile) -> Result<f64> {
    Ok(solve_equilibrium(g, p)?.objective)
}
