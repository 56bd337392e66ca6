use super::{build_system, JacobianMode, TOL_FEAS};
use crate::sketch::SketchGraph;
use crate::SolverError;

/// Singular values at or below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Number of variables minus the numerical rank of the constraint Jacobian.
///
/// Only meaningful on the constraint manifold, so an unsatisfied sketch is
/// rejected.
pub fn dof_estimate(sketch: &SketchGraph) -> Result<usize, SolverError> {
    let system = build_system(sketch, &[])?;
    let theta = &system.theta0().theta;
    let max_res = system.max_constraint_residual(theta);
    if !(max_res <= TOL_FEAS) {
        return Err(SolverError::Unsatisfied(max_res));
    }
    let jac = system.jacobian(theta, JacobianMode::Analytic, true);
    if jac.nrows() == 0 || jac.ncols() == 0 {
        return Ok(theta.len());
    }
    let sv = jac.singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > RANK_TOLERANCE * largest && s > 0.0).count();
    Ok(theta.len() - rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use crate::sketch::{Constraint, ConstraintKind, Primitive};

    #[test]
    fn free_line_has_four() {
        let s = SketchGraph::new(vec![Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.4, 0.7))]);
        assert_eq!(dof_estimate(&s).unwrap(), 4);
    }

    #[test]
    fn coincident_removes_two() {
        let s = SketchGraph::new(vec![
            Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.4, 0.7)),
            Primitive::line(Point2::new(0.4, 0.7), Point2::new(0.8, 0.2)),
        ])
        .with(Constraint::new(ConstraintKind::Coincident, (0, 2), (1, 1)));
        assert_eq!(dof_estimate(&s).unwrap(), 6);
    }

    #[test]
    fn unsatisfied_is_rejected() {
        let s = SketchGraph::new(vec![Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.4, 0.7))])
            .with(Constraint::new(ConstraintKind::Horizontal, (0, 4), (0, 4)));
        assert!(matches!(dof_estimate(&s), Err(SolverError::Unsatisfied(_))));
    }
}
