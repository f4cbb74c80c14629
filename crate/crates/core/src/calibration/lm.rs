//! Bound-projected Levenberg-Marquardt with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Weighted least-squares problem `min 1/2 |r(x)|^2` with an analytic Jacobian.
pub trait LeastSquares {
    fn residuals(&self, x: &[f64]) -> DVector<f64>;
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
    /// Clamps parameters into their feasible box.
    fn project(&self, _x: &mut [f64]) {}
    /// Bounds `(lower, upper)` used to freeze the gradient of parameters that
    /// sit on a bound and are pushed outward.
    fn bounds(&self, x: &[f64]) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY); x.len()]
    }
    /// Norm of the weighted data the residuals are differenced from. Sets
    /// the floor below which the gradient cannot be resolved in `f64`.
    fn data_scale(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevenbergMarquardt {
    pub max_iterations: usize,
    pub initial_lambda: f64,
    /// Convergence threshold on the scaled gradient: the largest cosine
    /// between the residual vector and a Jacobian column. Once no step
    /// reduces the residual, the threshold is raised to the rounding floor
    /// `4 eps |y| / |r|`, which only matters when residuals approach machine
    /// precision relative to the data.
    pub gtol: f64,
    /// Relative parameter change below which iteration stops.
    pub xtol: f64,
}

impl Default for LevenbergMarquardt {
    fn default() -> Self {
        LevenbergMarquardt { max_iterations: 200, initial_lambda: 1e-3, gtol: 1e-8, xtol: 1e-15 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    /// Residual norms after the start point and every accepted step.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `J^T J` at the solution.
    pub normal_matrix: DMatrix<f64>,
    pub residuals: DVector<f64>,
}

impl LmOutcome {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.norm()
    }
}

impl LevenbergMarquardt {
    pub fn minimize<P: LeastSquares>(&self, problem: &P, x0: &[f64]) -> Result<LmOutcome> {
        let mut x = x0.to_vec();
        problem.project(&mut x);
        let mut r = problem.residuals(&x);
        let scale = r.norm().max(f64::MIN_POSITIVE);
        let mut history = vec![r.norm()];
        let mut lambda = self.initial_lambda;
        let mut iterations = 0;

        let jac = problem.jacobian(&x);
        check_rank(&jac)?;

        let mut converged = false;
        while iterations < self.max_iterations {
            iterations += 1;
            let jac = problem.jacobian(&x);
            let jtj = jac.transpose() * &jac;
            let mut grad = jac.transpose() * &r;
            freeze_bound_gradient(&problem.bounds(&x), &x, &mut grad);
            if self.gradient_small(&jtj, &grad, r.norm(), scale, 0.0) {
                converged = true;
                break;
            }

            let mut accepted = false;
            while lambda < 1e20 {
                let mut damped = jtj.clone();
                for i in 0..damped.nrows() {
                    damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
                }
                let step = match damped.cholesky() {
                    Some(ch) => ch.solve(&(-&grad)),
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                };
                let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                problem.project(&mut trial);
                let r_trial = problem.residuals(&trial);
                if r_trial.norm() < r.norm() {
                    let rel_change = x
                        .iter()
                        .zip(&trial)
                        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
                        .fold(0.0, f64::max);
                    x = trial;
                    r = r_trial;
                    history.push(r.norm());
                    lambda = (lambda / 10.0).max(1e-15);
                    accepted = true;
                    if rel_change <= self.xtol {
                        lambda = f64::INFINITY;
                    }
                    break;
                }
                lambda *= 10.0;
            }
            if !accepted || !lambda.is_finite() {
                break;
            }
        }

        let jac = problem.jacobian(&x);
        let jtj = jac.transpose() * &jac;
        if !converged {
            let mut grad = jac.transpose() * &r;
            freeze_bound_gradient(&problem.bounds(&x), &x, &mut grad);
            converged = self.gradient_small(&jtj, &grad, r.norm(), scale, problem.data_scale());
        }
        Ok(LmOutcome {
            x,
            residual_history: history,
            iterations,
            converged,
            normal_matrix: jtj,
            residuals: r,
        })
    }

    fn gradient_small(
        &self,
        jtj: &DMatrix<f64>,
        grad: &DVector<f64>,
        rnorm: f64,
        scale: f64,
        data_scale: f64,
    ) -> bool {
        if rnorm <= 1e-13 * scale {
            return true;
        }
        let tol = self.gtol.max(4.0 * f64::EPSILON * data_scale / rnorm);
        (0..grad.len()).all(|i| {
            let col = jtj[(i, i)].sqrt();
            col == 0.0 || grad[i].abs() / (col * rnorm) <= tol
        })
    }
}

fn freeze_bound_gradient(bounds: &[(f64, f64)], x: &[f64], grad: &mut DVector<f64>) {
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        // descent direction is -grad
        if (x[i] <= lo && grad[i] > 0.0) || (x[i] >= hi && grad[i] < 0.0) {
            grad[i] = 0.0;
        }
    }
}

/// Rejects Jacobians whose column-normalized normal matrix is numerically
/// singular.
fn check_rank(jac: &DMatrix<f64>) -> Result<()> {
    let jtj = jac.transpose() * jac;
    let n = jtj.nrows();
    let mut corr = jtj.clone();
    for i in 0..n {
        for j in 0..n {
            let d = (jtj[(i, i)] * jtj[(j, j)]).sqrt();
            if d == 0.0 {
                return Err(Error::RankDeficient(format!("parameter {i} has no influence")));
            }
            corr[(i, j)] = jtj[(i, j)] / d;
        }
    }
    let eig = corr.symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < 1e-12 {
        return Err(Error::RankDeficient(format!(
            "normal matrix condition too large (min scaled eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}

/// Inverse of `J^T J`, or `None` when singular.
pub fn covariance(jtj: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    jtj.clone().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rosenbrock in residual form.
    struct Rosenbrock;

    impl LeastSquares for Rosenbrock {
        fn residuals(&self, x: &[f64]) -> DVector<f64> {
            DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]])
        }
        fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0])
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let out = LevenbergMarquardt::default().minimize(&Rosenbrock, &[-1.2, 1.0]).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-10 && (out.x[1] - 1.0).abs() < 1e-10);
        assert!(out.residual_history.windows(2).all(|w| w[1] <= w[0]));
    }

    struct Collinear;

    impl LeastSquares for Collinear {
        fn residuals(&self, x: &[f64]) -> DVector<f64> {
            DVector::from_vec(vec![x[0] + x[1] - 1.0, 2.0 * (x[0] + x[1]) - 2.0])
        }
        fn jacobian(&self, _x: &[f64]) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0])
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        assert!(matches!(
            LevenbergMarquardt::default().minimize(&Collinear, &[0.0, 0.0]),
            Err(Error::RankDeficient(_))
        ));
    }
}
