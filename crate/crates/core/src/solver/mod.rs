//! Constraint solving over primitive parameters.
//!
//! A sketch becomes a [`ResidualSystem`]: one block per constraint (see
//! [`residual::Term`]), optional soft pins pulling point subreferences to
//! targets, and a weak proximal regularization that keeps under-constrained
//! directions still. [`solve`] runs damped Gauss–Newton (Levenberg–Marquardt)
//! on the weighted squared residual norm.

mod dof;
mod lm;
pub mod residual;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geom::{Dual, Point2};
use crate::sketch::{validate, SketchGraph, Subref, SubrefTarget, Violation};
use crate::{SketchError, SolverError};

pub use dof::{dof_estimate, RANK_TOLERANCE};
pub use lm::{solve, solve_with, JacobianMode, SolveOptions, SolveReport};
use residual::{term_for, Term};

pub const TOL_FEAS: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-7;
pub const CONSTRAINT_WEIGHT: f64 = 1.0;
pub const PIN_WEIGHT: f64 = 1.0;
pub const REGULARIZATION_WEIGHT: f64 = 1e-3;

/// All primitive parameters concatenated in primitive order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableVector {
    pub theta: Vec<f64>,
    offsets: Vec<usize>,
}

impl VariableVector {
    pub fn from_sketch(sketch: &SketchGraph) -> Self {
        let mut offsets = Vec::with_capacity(sketch.primitives.len());
        let mut theta = Vec::new();
        for p in &sketch.primitives {
            offsets.push(theta.len());
            theta.extend_from_slice(&p.params);
        }
        Self { theta, offsets }
    }

    /// Flat index of parameter `param` of primitive `primitive`.
    pub fn index(&self, primitive: usize, param: usize) -> usize {
        self.offsets[primitive] + param
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Copy the values back into a sketch with the same primitive layout.
    pub fn apply_to(&self, sketch: &SketchGraph) -> SketchGraph {
        let mut out = sketch.clone();
        for (p, &off) in out.primitives.iter_mut().zip(&self.offsets) {
            let n = p.params.len();
            p.params.copy_from_slice(&self.theta[off..off + n]);
        }
        out
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Self {
        assert_eq!(theta.len(), self.theta.len());
        Self {
            theta,
            offsets: self.offsets.clone(),
        }
    }
}

/// Soft target for a point-valued subreference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pin {
    pub primitive: usize,
    pub subref: Subref,
    pub target: Point2,
    pub weight: f64,
}

impl Pin {
    pub fn new(primitive: usize, subref: Subref, target: Point2) -> Self {
        Self {
            primitive,
            subref,
            target,
            weight: PIN_WEIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockSource {
    Constraint(usize),
    Pin(usize),
}

#[derive(Debug, Clone)]
pub struct Block {
    pub source: BlockSource,
    pub weight: f64,
    pub term: Term,
    vars: Vec<usize>,
}

impl Block {
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }
}

#[derive(Debug, Clone)]
pub struct ResidualSystem {
    pub blocks: Vec<Block>,
    /// Weight of the proximal term `w·‖θ − θ_k‖²` around the current iterate.
    pub regularization: f64,
    initial: VariableVector,
}

/// Build the residual system for a sketch at its own parameters.
pub fn build_system(sketch: &SketchGraph, pins: &[Pin]) -> Result<ResidualSystem, SolverError> {
    // The solver is frame-agnostic; only structural invariants matter here.
    let violations = validate(sketch);
    if let Some(v) = violations
        .iter()
        .find(|v| !matches!(v, Violation::OutOfCanvas { .. }))
    {
        return Err(SketchError::Invalid(v.to_string()).into());
    }
    let vars = VariableVector::from_sketch(sketch);
    let mut blocks = Vec::with_capacity(sketch.constraints.len() + pins.len());
    for (idx, c) in sketch.constraints.iter().enumerate() {
        let term = term_for(idx, c, &sketch.primitives, vars.offsets(), &vars.theta)?;
        blocks.push(Block {
            source: BlockSource::Constraint(idx),
            weight: CONSTRAINT_WEIGHT,
            vars: term.vars(),
            term,
        });
    }
    for (idx, pin) in pins.iter().enumerate() {
        let bad = |reason: &str| SolverError::BadPin {
            primitive: pin.primitive,
            reason: reason.to_string(),
        };
        let prim = sketch
            .primitives
            .get(pin.primitive)
            .ok_or_else(|| bad("index out of range"))?;
        if !matches!(prim.subref_point(pin.subref)?, SubrefTarget::Point(_)) {
            return Err(bad("pins need a point-valued subreference"));
        }
        if !(pin.weight > 0.0) || !pin.target.is_finite() {
            return Err(bad("weight must be positive and target finite"));
        }
        let p = vars.offsets()[pin.primitive] + prim.subref_param_offset(pin.subref).unwrap();
        let term = Term::Pin {
            p,
            target: pin.target,
        };
        blocks.push(Block {
            source: BlockSource::Pin(idx),
            weight: pin.weight,
            vars: term.vars(),
            term,
        });
    }
    Ok(ResidualSystem {
        blocks,
        regularization: REGULARIZATION_WEIGHT,
        initial: vars,
    })
}

impl ResidualSystem {
    /// Parameters the system was built from.
    pub fn theta0(&self) -> &VariableVector {
        &self.initial
    }

    pub fn n_vars(&self) -> usize {
        self.initial.len()
    }

    pub fn constraint_blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks
            .iter()
            .filter(|b| matches!(b.source, BlockSource::Constraint(_)))
    }

    /// Unweighted residual values per block.
    pub fn block_residuals(&self, theta: &[f64]) -> Vec<Vec<f64>> {
        self.blocks.iter().map(|b| b.term.eval_f64(theta)).collect()
    }

    pub fn max_constraint_residual(&self, theta: &[f64]) -> f64 {
        self.constraint_blocks()
            .flat_map(|b| b.term.eval_f64(theta))
            .map(|r| if r.is_finite() { r.abs() } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }

    /// Weighted residual vector `√w · r` over the selected blocks.
    pub(crate) fn weighted_residuals(&self, theta: &[f64], constraints_only: bool) -> Vec<f64> {
        let mut out = Vec::new();
        for b in self.selected(constraints_only) {
            let sw = if constraints_only { 1.0 } else { b.weight.sqrt() };
            out.extend(b.term.eval_f64(theta).into_iter().map(|r| sw * r));
        }
        out
    }

    fn selected(&self, constraints_only: bool) -> impl Iterator<Item = &Block> {
        self.blocks
            .iter()
            .filter(move |b| !constraints_only || matches!(b.source, BlockSource::Constraint(_)))
    }

    /// Jacobian of the weighted residual vector. With `constraints_only`
    /// the rows are the unweighted constraint residuals.
    pub fn jacobian(&self, theta: &[f64], mode: JacobianMode, constraints_only: bool) -> DMatrix<f64> {
        let rows: usize = self
            .selected(constraints_only)
            .map(|b| b.term.eval_f64(theta).len())
            .sum();
        let mut jac = DMatrix::zeros(rows, theta.len());
        let mut row = 0;
        let mut scratch = Vec::new();
        let mut work = theta.to_vec();
        for b in self.selected(constraints_only) {
            let sw = if constraints_only { 1.0 } else { b.weight.sqrt() };
            let base = b.term.eval_f64(theta);
            for &v in &b.vars {
                match mode {
                    JacobianMode::Analytic => {
                        scratch.clear();
                        b.term.eval(
                            &|k| Dual::new(theta[k], if k == v { 1.0 } else { 0.0 }),
                            &mut scratch,
                        );
                        for (r, d) in scratch.iter().enumerate() {
                            jac[(row + r, v)] = sw * d.d;
                        }
                    }
                    JacobianMode::ForwardDifference => {
                        work[v] = theta[v] + FD_STEP;
                        let bumped = b.term.eval_f64(&work);
                        work[v] = theta[v];
                        for (r, (hi, lo)) in bumped.iter().zip(&base).enumerate() {
                            jac[(row + r, v)] = sw * (hi - lo) / FD_STEP;
                        }
                    }
                }
            }
            row += base.len();
        }
        jac
    }
}

/// Largest constraint residual of a sketch at its own parameters
/// (0 for a sketch without constraints).
pub fn check(sketch: &SketchGraph) -> Result<f64, SolverError> {
    let system = build_system(sketch, &[])?;
    Ok(system.max_constraint_residual(&system.initial.theta))
}
