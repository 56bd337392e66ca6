use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ResidualSystem, VariableVector, TOL_FEAS};
use crate::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Exact derivatives via dual numbers.
    Analytic,
    /// Forward differences with step `FD_STEP`.
    ForwardDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol_feas: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    pub lambda0: f64,
    pub lambda_down: f64,
    pub lambda_up: f64,
    pub jacobian: JacobianMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_feas: TOL_FEAS,
            step_tol: 1e-10,
            max_iter: 200,
            lambda0: 1e-3,
            lambda_down: 0.3,
            lambda_up: 10.0,
            jacobian: JacobianMode::Analytic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub max_constraint_residual: f64,
    pub theta_final: Vec<f64>,
}

pub fn solve(system: &ResidualSystem, theta0: &VariableVector) -> Result<SolveReport, SolverError> {
    solve_with(system, theta0, &SolveOptions::default())
}

fn half_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Levenberg–Marquardt on `½‖√W r(θ)‖²`.
///
/// Each step solves `(JᵀJ + (λ + w_reg) I) δ = −Jᵀr`; the `w_reg` floor is
/// the proximal regularization around the current iterate, so directions
/// the constraints and pins do not see never move. The loop ends when a
/// proposed step is shorter than `step_tol`; the run is converged if the
/// constraint residual is then within `tol_feas`.
pub fn solve_with(
    system: &ResidualSystem,
    theta0: &VariableVector,
    opts: &SolveOptions,
) -> Result<SolveReport, SolverError> {
    let n = theta0.len();
    let mut theta = theta0.theta.clone();
    let mut r = system.weighted_residuals(&theta, false);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let mut cost = half_sq(&r);
    let mut lambda = opts.lambda0;
    let mut iterations = 0;
    let mut stationary = false;

    'outer: while iterations < opts.max_iter {
        let jac = system.jacobian(&theta, opts.jacobian, false);
        let jt = jac.transpose();
        let g = &jt * DVector::from_column_slice(&r);
        let a = &jt * &jac;
        loop {
            iterations += 1;
            let mut m: DMatrix<f64> = a.clone();
            for k in 0..n {
                m[(k, k)] += lambda + system.regularization;
            }
            let rhs = -&g;
            let delta = match m.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => match m.lu().solve(&rhs) {
                    Some(d) => d,
                    None => break 'outer,
                },
            };
            if !(delta.norm() > opts.step_tol) {
                stationary = delta.norm().is_finite();
                break 'outer;
            }
            let trial: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, d)| t + d).collect();
            let r_trial = system.weighted_residuals(&trial, false);
            let cost_trial = half_sq(&r_trial);
            if cost_trial.is_finite() && cost_trial < cost {
                theta = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda * opts.lambda_down).max(1e-15);
                break;
            }
            lambda *= opts.lambda_up;
            if lambda > 1e16 || iterations >= opts.max_iter {
                break 'outer;
            }
        }
    }

    let max_res = system.max_constraint_residual(&theta);
    Ok(SolveReport {
        converged: stationary && max_res <= opts.tol_feas,
        iterations,
        max_constraint_residual: max_res,
        theta_final: theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use crate::sketch::{Constraint, ConstraintKind, Primitive, SketchGraph, Subref};
    use crate::solver::{build_system, Pin};

    #[test]
    fn satisfied_system_is_a_fixed_point() {
        let s = SketchGraph::new(vec![
            Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.5, 0.1)),
            Primitive::line(Point2::new(0.5, 0.1), Point2::new(0.7, 0.6)),
        ])
        .with(Constraint::new(ConstraintKind::Coincident, (0, 2), (1, 1)))
        .with(Constraint::new(ConstraintKind::Horizontal, (0, 4), (0, 4)));
        let sys = build_system(&s, &[]).unwrap();
        let rep = solve(&sys, sys.theta0()).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert_eq!(rep.theta_final, sys.theta0().theta);
    }

    #[test]
    fn coincident_gap_closes() {
        let s = SketchGraph::new(vec![
            Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.5, 0.1)),
            Primitive::line(Point2::new(0.52, 0.1), Point2::new(0.7, 0.6)),
        ])
        .with(Constraint::new(ConstraintKind::Coincident, (0, 2), (1, 1)));
        let sys = build_system(&s, &[]).unwrap();
        let rep = solve(&sys, sys.theta0()).unwrap();
        assert!(rep.converged, "{rep:?}");
        let t = &rep.theta_final;
        assert!((t[2] - t[4]).abs() <= 1e-6 && (t[3] - t[5]).abs() <= 1e-6);
    }

    #[test]
    fn pin_drags_free_line() {
        let s = SketchGraph::new(vec![
            Primitive::line(Point2::new(0.2, 0.2), Point2::new(0.6, 0.4)),
            Primitive::line(Point2::new(0.1, 0.8), Point2::new(0.9, 0.8)),
        ]);
        let pin = Pin::new(0, Subref(1), Point2::new(0.3, 0.2));
        let sys = build_system(&s, &[pin]).unwrap();
        let rep = solve(&sys, sys.theta0()).unwrap();
        assert!(rep.converged);
        let t = &rep.theta_final;
        assert!((t[0] - 0.3).abs() <= 1e-6 && (t[1] - 0.2).abs() <= 1e-6);
        assert_eq!(&t[2..4], &[0.6, 0.4]);
        assert_eq!(&t[4..8], &s.flat_params()[4..8]);
    }

    #[test]
    fn forward_difference_mode_also_converges() {
        let s = SketchGraph::new(vec![
            Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.5, 0.12)),
            Primitive::line(Point2::new(0.1, 0.3), Point2::new(0.5, 0.4)),
        ])
        .with(Constraint::new(ConstraintKind::Parallel, (0, 4), (1, 4)))
        .with(Constraint::new(ConstraintKind::Horizontal, (0, 4), (0, 4)));
        let sys = build_system(&s, &[]).unwrap();
        let opts = SolveOptions {
            jacobian: JacobianMode::ForwardDifference,
            ..Default::default()
        };
        let rep = solve_with(&sys, sys.theta0(), &opts).unwrap();
        assert!(rep.max_constraint_residual <= 1e-6, "{rep:?}");
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let s = SketchGraph::new(vec![
            Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.5, 0.1)),
            Primitive::line(Point2::new(0.1, 0.3), Point2::new(0.5, 0.4)),
        ])
        .with(Constraint::new(ConstraintKind::Parallel, (0, 4), (1, 4)));
        let sys = build_system(&s, &[]).unwrap();
        let bad = sys.theta0().with_theta(vec![f64::NAN; 8]);
        assert!(matches!(solve(&sys, &bad), Err(SolverError::NonFinite)));
    }
}
