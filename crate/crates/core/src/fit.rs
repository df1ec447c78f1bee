//! Weighted non-linear least squares (Levenberg-Marquardt).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Outcome of a weighted least-squares fit.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub params: Vec<f64>,
    /// Parameter covariance (JᵀWJ)⁻¹, using the supplied uncertainties as absolute.
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub dof: usize,
}

impl LeastSquares {
    pub fn std_error(&self, i: usize) -> f64 {
        self.covariance[(i, i)].max(0.0).sqrt()
    }

    pub fn reduced_chi2(&self) -> f64 {
        if self.dof == 0 {
            f64::NAN
        } else {
            self.chi2 / self.dof as f64
        }
    }
}

fn chi2<F>(model: &F, x: &[f64], y: &[f64], sigma: &[f64], p: &[f64]) -> f64
where
    F: Fn(f64, &[f64]) -> f64,
{
    x.iter()
        .zip(y)
        .zip(sigma)
        .map(|((&xi, &yi), &si)| ((yi - model(xi, p)) / si).powi(2))
        .sum()
}

fn jacobian<F>(model: &F, x: &[f64], sigma: &[f64], p: &[f64]) -> DMatrix<f64>
where
    F: Fn(f64, &[f64]) -> f64,
{
    let mut jac = DMatrix::zeros(x.len(), p.len());
    let mut work = p.to_vec();
    for j in 0..p.len() {
        let h = 1e-6 * p[j].abs().max(1e-6);
        work[j] = p[j] + h;
        let up: Vec<f64> = x.iter().map(|&xi| model(xi, &work)).collect();
        work[j] = p[j] - h;
        for (i, &xi) in x.iter().enumerate() {
            jac[(i, j)] = (up[i] - model(xi, &work)) / (2.0 * h) / sigma[i];
        }
        work[j] = p[j];
    }
    jac
}

/// Minimizes Σ((yᵢ − f(xᵢ; p))/σᵢ)² starting from `p0`.
pub fn levenberg_marquardt<F>(model: F, x: &[f64], y: &[f64], sigma: &[f64], p0: &[f64]) -> Result<LeastSquares>
where
    F: Fn(f64, &[f64]) -> f64,
{
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), sigma.len());
    if x.len() < p0.len() {
        return Err(Error::InsufficientData(format!(
            "{} points for {} parameters",
            x.len(),
            p0.len()
        )));
    }
    if sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InsufficientData("non-positive uncertainty".into()));
    }

    let mut p = p0.to_vec();
    let mut cost = chi2(&model, x, y, sigma, &p);
    if !cost.is_finite() {
        return Err(Error::FitDiverged("non-finite initial residual".into()));
    }
    let mut lambda = 1e-3;
    let mut converged = false;

    for _ in 0..500 {
        let jac = jacobian(&model, x, sigma, &p);
        let resid = DVector::from_iterator(
            x.len(),
            x.iter().zip(y).zip(sigma).map(|((&xi, &yi), &si)| (yi - model(xi, &p)) / si),
        );
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * resid;

        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj.clone();
            for k in 0..p.len() {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_cost = chi2(&model, x, y, sigma, &trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel = (cost - trial_cost) / cost.max(1e-300);
                let small_step = step
                    .iter()
                    .zip(&p)
                    .all(|(s, v)| s.abs() <= 1e-10 * v.abs().max(1e-10));
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-12 || small_step {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || converged {
            // No downhill step left: at a minimum to working precision.
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::FitDiverged("iteration limit reached".into()));
    }

    let jac = jacobian(&model, x, sigma, &p);
    let covariance = (jac.transpose() * &jac)
        .try_inverse()
        .ok_or_else(|| Error::FitDiverged("singular normal matrix at optimum".into()))?;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitDiverged("non-finite parameters".into()));
    }
    Ok(LeastSquares {
        params: p,
        covariance,
        chi2: cost,
        dof: x.len() - p0.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_line_with_textbook_errors() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 0.5 * v).collect();
        let sigma = vec![0.1; 10];
        let fit = levenberg_marquardt(|x, p| p[0] + p[1] * x, &x, &y, &sigma, &[0.0, 0.0]).unwrap();
        assert!((fit.params[0] - 2.0).abs() < 1e-8);
        assert!((fit.params[1] - 0.5).abs() < 1e-8);
        // σ_slope = σ / √(Σ(x − x̄)²)
        let sxx: f64 = x.iter().map(|v| (v - 4.5).powi(2)).sum();
        assert!((fit.std_error(1) - 0.1 / sxx.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn rejects_underdetermined_problems() {
        let r = levenberg_marquardt(|x, p| p[0] * x + p[1], &[1.0], &[1.0], &[1.0], &[0.0, 0.0]);
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }
}
