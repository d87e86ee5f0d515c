//! Opinion dynamics on social networks with resistant agents.
//!
//! Each agent `i` holds a fixed innate opinion `s_i ∈ [0,1]` and a resistance
//! `α_i ∈ (0,1]`, and repeatedly averages its expressed opinion with its
//! neighbors':
//!
//! ```text
//! x_i(t+1) = α_i s_i + (1 - α_i) · mean of x_j(t) over neighbors j
//! ```
//!
//! The process converges to the equilibrium `z = (I - (I-A)P)⁻¹ A s`, where
//! `P` is the random-walk matrix of the graph and `A = diag(α)`. This crate
//! computes `z` (directly, by fixed-point iteration, or by Monte-Carlo
//! absorbing walks) and optimizes the total equilibrium opinion `f = Σ z_i`
//! by choosing resistances within a box `[ℓ, u]`:
//!
//! * [`unbudgeted`] — every agent's resistance may be set; after the
//!   substitution `X = A⁻¹` the problem is solved by projected gradient
//!   descent plus an endpoint local search (an optimum always lies on the
//!   corners of the box).
//! * [`budgeted`] — at most `k` agents may be touched; a greedy heuristic
//!   with rank-one (Sherman-Morrison) candidate evaluation, two simple
//!   baselines, and an exhaustive oracle for small instances.

pub mod budgeted;
pub mod equilibrium;
mod error;
pub mod graph;
mod intervention;
pub mod linalg;
pub mod unbudgeted;

pub use equilibrium::{EquilibriumResult, Method, OpinionProfile};
pub use error::{Error, Result};
pub use graph::Graph;
pub use intervention::{BoxBounds, Direction, InterventionPlan, SolverTrace};
