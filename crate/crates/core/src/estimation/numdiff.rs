//! Central finite differences.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Step for first derivatives: `ε^(1/3)·max(1, |x|)`.
#[inline]
pub fn gradient_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Per-coordinate step rule for second differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `ε^(1/3)·max(1, |x|)`, the first-derivative optimum.
    CubeRoot,
    /// `ε^(1/4)·max(1, |x|)`. Second differences divide by `h²`, so this
    /// balances truncation against rounding noise of order `ε/h²`.
    #[default]
    FourthRoot,
}

impl StepRule {
    #[inline]
    pub fn step(self, x: f64) -> f64 {
        let base = match self {
            StepRule::CubeRoot => f64::EPSILON.cbrt(),
            StepRule::FourthRoot => f64::EPSILON.sqrt().sqrt(),
        };
        base * x.abs().max(1.0)
    }
}

/// Central-difference gradient. Coordinates where one side is not finite
/// fall back to a one-sided difference; if both sides fail the entry is NaN.
pub fn central_gradient<F>(f: &F, x: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut probe = x.to_vec();
    let mut centre: Option<f64> = None;
    (0..x.len())
        .map(|j| {
            let h = gradient_step(x[j]);
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            probe[j] = x[j];
            match (up.is_finite(), down.is_finite()) {
                (true, true) => (up - down) / (2.0 * h),
                (true, false) => (up - *centre.get_or_insert_with(|| f(x))) / h,
                (false, true) => (*centre.get_or_insert_with(|| f(x)) - down) / h,
                (false, false) => f64::NAN,
            }
        })
        .collect()
}

/// Symmetric central-difference Hessian.
pub fn numerical_hessian<F>(f: &F, x: &[f64], rule: StepRule) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let k = x.len();
    let f0 = f(x);
    if !f0.is_finite() {
        return Err(Error::NonFinite("objective at the Hessian centre".into()));
    }
    let h: Vec<f64> = x.iter().map(|&v| rule.step(v)).collect();
    let mut probe = x.to_vec();
    let mut eval = |moves: &[(usize, f64)]| {
        for &(j, d) in moves {
            probe[j] = x[j] + d;
        }
        let v = f(&probe);
        for &(j, _) in moves {
            probe[j] = x[j];
        }
        v
    };

    let mut hess = DMatrix::zeros(k, k);
    for i in 0..k {
        let up = eval(&[(i, h[i])]);
        let down = eval(&[(i, -h[i])]);
        hess[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let pp = eval(&[(i, h[i]), (j, h[j])]);
            let pm = eval(&[(i, h[i]), (j, -h[j])]);
            let mp = eval(&[(i, -h[i]), (j, h[j])]);
            let mm = eval(&[(i, -h[i]), (j, -h[j])]);
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    for i in 0..k {
        for j in 0..=i {
            if !hess[(i, j)].is_finite() {
                return Err(Error::NonFinite(format!("Hessian entry ({i}, {j})")));
            }
        }
    }
    Ok(hess)
}
