//! BFGS minimization with a backtracking (Armijo) line search and
//! finite-difference gradients.

use super::numdiff::central_gradient;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop once the gradient ∞-norm is at most this.
    pub grad_tol: f64,
    /// Stop once an accepted step changes the objective by at most
    /// `rel_tol·(|f| + rel_tol)`.
    pub rel_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            grad_tol: 1e-6,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Gradient,
    RelativeChange,
    /// No decrease along a freshly reset search direction.
    LineSearch,
    MaxIterations,
    NonFiniteStart,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        matches!(self, Termination::Gradient | Termination::RelativeChange)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

impl BfgsOutcome {
    pub fn gradient_norm(&self) -> f64 {
        inf_norm(&self.gradient)
    }
}

/// Longest first trial step in ∞-norm.
const MAX_STEP: f64 = 2.0;
const ARMIJO: f64 = 1e-4;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct InverseHessian {
    n: usize,
    m: Vec<f64>,
    fresh: bool,
}

impl InverseHessian {
    fn identity(n: usize) -> Self {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        Self { n, m, fresh: true }
    }

    fn reset(&mut self) {
        *self = Self::identity(self.n);
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.m[i * self.n..(i + 1) * self.n], g))
            .collect()
    }

    /// `H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`, skipped unless `sᵀy > 0`.
    fn update(&mut self, s: &[f64], y: &[f64]) {
        let n = self.n;
        let sy = dot(s, y);
        let yy = dot(y, y);
        if !(sy > 1e-10 * dot(s, s).sqrt() * yy.sqrt()) {
            return;
        }
        if self.fresh {
            let scale = sy / yy;
            self.m.iter_mut().for_each(|v| *v *= scale);
            self.fresh = false;
        }
        let rho = 1.0 / sy;
        let hy = self.apply(y);
        let yhy = dot(y, &hy);
        for i in 0..n {
            for j in 0..n {
                self.m[i * n + j] +=
                    -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
            }
        }
    }
}

/// Minimizes `f` from `x0`. Non-finite objective values are treated as
/// infeasible and rejected by the line search.
pub fn minimize<F>(f: &F, x0: &[f64], options: &BfgsOptions) -> BfgsOutcome
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return BfgsOutcome {
            x,
            value: fx,
            gradient: vec![f64::NAN; n],
            iterations: 0,
            termination: Termination::NonFiniteStart,
        };
    }
    let mut g = central_gradient(f, &x);
    let mut h = InverseHessian::identity(n);

    for iteration in 1..=options.max_iterations {
        if inf_norm(&g) <= options.grad_tol {
            return BfgsOutcome {
                x,
                value: fx,
                gradient: g,
                iterations: iteration - 1,
                termination: Termination::Gradient,
            };
        }

        let mut d: Vec<f64> = h.apply(&g).into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            h.reset();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let d_norm = inf_norm(&d);
        let mut t = (MAX_STEP / d_norm).min(1.0);
        let x_norm = inf_norm(&x);
        let mut accepted = None;
        while t * d_norm > 1e-14 * (1.0 + x_norm) {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + ARMIJO * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t = if ft.is_finite() {
                // minimizer of the quadratic through f(x), slope and f(x + td)
                let q = -slope * t * t / (2.0 * (ft - fx - slope * t));
                q.clamp(0.1 * t, 0.5 * t)
            } else {
                0.2 * t
            };
        }

        let Some((x_new, f_new)) = accepted else {
            if !h.fresh {
                h.reset();
                continue;
            }
            return BfgsOutcome {
                x,
                value: fx,
                gradient: g,
                iterations: iteration,
                termination: Termination::LineSearch,
            };
        };

        let g_new = central_gradient(f, &x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let small_change = (fx - f_new).abs() <= options.rel_tol * (fx.abs() + options.rel_tol);
        x = x_new;
        fx = f_new;
        g = g_new;
        if small_change {
            return BfgsOutcome {
                x,
                value: fx,
                gradient: g,
                iterations: iteration,
                termination: Termination::RelativeChange,
            };
        }
        if y.iter().all(|v| v.is_finite()) {
            h.update(&s, &y);
        } else {
            h.reset();
        }
    }

    BfgsOutcome {
        x,
        value: fx,
        gradient: g,
        iterations: options.max_iterations,
        termination: Termination::MaxIterations,
    }
}
