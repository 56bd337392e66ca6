//! Constraint-preserving transformations and baseline augmentations.
//!
//! A CPT drags a randomly chosen point subreference to a random target inside
//! a square box around it and lets the constraint solver propagate the move.
//! The pinned solve is followed by an unpinned re-solve so the result always
//! lands back on the constraint manifold; rounds that fail are re-sampled.

mod corpus;
mod rotate;
mod synthetic;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Point2;
use crate::sketch::{bounding_box, normalize, validate, ConstraintKind, SketchGraph, Subref, SubrefTarget, Violation};
use crate::solver::{build_system, check, solve, Pin, VariableVector, TOL_FEAS};
use crate::SolverError;

pub use corpus::{
    augment_corpus, augment_sketch, derive_seed, AugmentOptions, LineError, Manifest, SketchCounts, SketchOutcome, Strategy,
};
pub use rotate::{generate_rotated, RotatedSketch};
pub use synthetic::{generate_synthetic, generate_synthetic_with, Pattern};

/// Displacement box side for point primitives, before scaling by `alpha`.
pub const POINT_EXTENT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptConfig {
    /// Perturbation rounds per CPT.
    pub rounds: usize,
    /// Box width as a fraction of the sampled primitive's extent.
    pub alpha: f64,
    pub seed: u64,
    pub max_attempts: usize,
    pub min_param_delta: f64,
    /// Rescale results that leave the unit canvas instead of rejecting them.
    pub renormalize: bool,
}

impl Default for CptConfig {
    fn default() -> Self {
        Self {
            rounds: 3,
            alpha: 0.5,
            seed: 0,
            max_attempts: 10,
            min_param_delta: 1e-3,
            renormalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CptReason {
    Ok,
    SolverFailed,
    OutOfCanvas,
    NotNovel,
}

impl CptReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::SolverFailed => "solver_failed",
            Self::OutOfCanvas => "out_of_canvas",
            Self::NotNovel => "not_novel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptResult {
    pub sketch: SketchGraph,
    pub accepted: bool,
    pub reason: CptReason,
    pub max_residual: f64,
}

/// One pinned-then-released solve. `None` when the solver cannot bring the
/// sketch back onto its constraints or the geometry degenerates.
fn perturb_once(current: &SketchGraph, pin: Pin) -> Result<Option<SketchGraph>, SolverError> {
    let release = build_system(current, &[])?;
    let pinned = build_system(current, &[pin])?;
    let start = VariableVector::from_sketch(current);
    let dragged = solve(&pinned, &start)?;
    if dragged.theta_final.iter().any(|v| !v.is_finite()) {
        return Ok(None);
    }
    let dragged = start.with_theta(dragged.theta_final);
    let settled = match solve(&release, &dragged) {
        Ok(rep) if rep.converged => rep,
        _ => return Ok(None),
    };
    let next = start.with_theta(settled.theta_final).apply_to(current);
    let broken = validate(&next)
        .iter()
        .any(|v| !matches!(v, Violation::OutOfCanvas { .. }));
    Ok((!broken).then_some(next))
}

fn sample_pin(sketch: &SketchGraph, cfg: &CptConfig, rng: &mut ChaCha8Rng) -> Pin {
    let primitive = rng.random_range(0..sketch.primitives.len());
    let prim = &sketch.primitives[primitive];
    let choices = prim.kind.point_subrefs();
    let subref = Subref(choices[rng.random_range(0..choices.len())]);
    let origin = match prim.subref_point(subref) {
        Ok(SubrefTarget::Point(p)) => p,
        _ => unreachable!("point subrefs resolve to points"),
    };
    let extent = match prim.kind {
        crate::PrimitiveKind::Point => POINT_EXTENT,
        _ => prim.extent(),
    };
    let w = cfg.alpha * extent;
    let dx = (rng.random::<f64>() - 0.5) * w;
    let dy = (rng.random::<f64>() - 0.5) * w;
    Pin::new(primitive, subref, Point2::new(origin.x + dx, origin.y + dy))
}

/// Generate one constraint-preserving transformation of `sketch`.
pub fn generate_cpt(sketch: &SketchGraph, cfg: &CptConfig) -> Result<CptResult, SolverError> {
    let residual = check(sketch)?;
    if !(residual <= TOL_FEAS) {
        return Err(SolverError::Unsatisfied(residual));
    }
    let reject = |reason, max_residual| CptResult {
        sketch: sketch.clone(),
        accepted: false,
        reason,
        max_residual,
    };
    if sketch.primitives.is_empty() {
        return Ok(reject(CptReason::NotNovel, residual));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = sketch.clone();
    let mut moved_rounds = 0;
    for _ in 0..cfg.rounds {
        for _ in 0..cfg.max_attempts {
            let pin = sample_pin(&current, cfg, &mut rng);
            if let Some(next) = perturb_once(&current, pin)? {
                current = next;
                moved_rounds += 1;
                break;
            }
        }
    }
    if moved_rounds == 0 {
        return Ok(reject(CptReason::SolverFailed, residual));
    }

    let source_system = build_system(sketch, &[])?;
    let inside = bounding_box(&current).is_some_and(|bb| bb.within(0.0, 1.0))
        && current.flat_params().iter().all(|v| (0.0..=1.0).contains(v));
    let (current, max_residual) = if inside {
        let r = source_system.max_constraint_residual(&VariableVector::from_sketch(&current).theta);
        (current, r)
    } else {
        // Rescaling moves fixed geometry and changes offset datums, which
        // would alter the constraint set.
        let frame_bound = current
            .constraints
            .iter()
            .any(|c| c.kind == ConstraintKind::Fix || (c.kind == ConstraintKind::Offset && c.datum.is_some()));
        if !cfg.renormalize || frame_bound {
            return Ok(reject(CptReason::OutOfCanvas, residual));
        }
        match normalize(&current) {
            Ok(n) => {
                let r = check(&n)?;
                (n, r)
            }
            Err(_) => return Ok(reject(CptReason::OutOfCanvas, residual)),
        }
    };
    if !(max_residual <= TOL_FEAS) {
        return Ok(reject(CptReason::SolverFailed, max_residual));
    }
    let novel = sketch.max_param_delta(&current) >= cfg.min_param_delta;
    Ok(CptResult {
        sketch: current,
        accepted: novel,
        reason: if novel { CptReason::Ok } else { CptReason::NotNovel },
        max_residual,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::geom::Point2;
    use crate::sketch::{Constraint, ConstraintKind, Primitive, SketchGraph};

    /// Axis-aligned rectangle: corner chain plus horizontal/vertical sides.
    pub fn rectangle(x0: f64, y0: f64, w: f64, h: f64) -> SketchGraph {
        let c = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)];
        let lines = (0..4)
            .map(|k| {
                let (a, b) = (c[k], c[(k + 1) % 4]);
                Primitive::line(Point2::new(a.0, a.1), Point2::new(b.0, b.1))
            })
            .collect();
        let mut s = SketchGraph::new(lines);
        for k in 0..4 {
            s.constrain(Constraint::new(ConstraintKind::Coincident, (k, 2), ((k + 1) % 4, 1)));
        }
        for k in [0, 2] {
            s.constrain(Constraint::new(ConstraintKind::Horizontal, (k, 4), (k, 4)));
        }
        for k in [1, 3] {
            s.constrain(Constraint::new(ConstraintKind::Vertical, (k, 4), (k, 4)));
        }
        s
    }

    /// Rectangle with the bottom edge fixed and equal adjacent sides: no
    /// remaining freedom.
    pub fn fixed_square() -> SketchGraph {
        rectangle(0.2, 0.2, 0.5, 0.5)
            .with(Constraint::new(ConstraintKind::Fix, (0, 4), (0, 4)))
            .with(Constraint::new(ConstraintKind::Equal, (0, 4), (1, 4)))
    }
}
