//! Discrete maximum-entropy fields with prescribed density, momentum and
//! energy, found by Newton iteration on the dual.
//!
//! The maximizer of `-Σ w f log f` (plus any linear energy term) on the grid,
//! subject to `V Σ w f φ_j = c_j` for `φ = (1, ζ_1..ζ_n, |ζ|²/2)`, is the
//! exponential family `f = exp(θ·φ)`. The dual
//! `Φ(θ) = V Σ w exp(θ·φ) - θ·c` is smooth and strictly convex with gradient
//! equal to the constraint residual, so Newton with backtracking converges
//! from any start. There are `n + 2` unknowns regardless of grid size.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;

/// Constraint values: `∫f`, `∫ζf`, `∫|ζ|²f/2`, already multiplied by the volume.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTargets {
    pub rho: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
}

impl MomentTargets {
    fn as_vec(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.momentum.len() + 2);
        c.push(self.rho);
        c.extend_from_slice(&self.momentum);
        c.push(self.energy);
        c
    }

    fn scale(&self) -> f64 {
        (self.rho.abs() + self.energy.abs()).max(1e-300)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DualOptions {
    /// Converged when every residual is below `tol * (ρ + E)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Converged dual point.
#[derive(Debug, Clone)]
pub struct DualSolution {
    /// `(θ_0, θ_1..θ_n, θ_{n+1})` multiplying `(1, ζ, |ζ|²/2)`.
    pub theta: Vec<f64>,
    /// `exp(θ·φ)` at every node.
    pub profile: Vec<f64>,
    pub iterations: usize,
    /// Largest absolute constraint residual.
    pub residual: f64,
}

impl DualSolution {
    /// Coefficient of `|ζ|²/2`; negative at any solution on a wide grid.
    pub fn quadratic(&self) -> f64 {
        *self.theta.last().expect("theta has n+2 entries")
    }

    /// Coefficients of `ζ_k`.
    pub fn linear(&self) -> &[f64] {
        &self.theta[1..self.theta.len() - 1]
    }
}

fn exponent(grid: &VelocityGrid, theta: &[f64], i: usize) -> f64 {
    let n = grid.dim();
    let z = grid.node(i);
    let mut e = theta[0] + theta[n + 1] * 0.5 * grid.speed_sq(i);
    for a in 0..n {
        e += theta[a + 1] * z[a];
    }
    e
}

fn feature(grid: &VelocityGrid, i: usize, j: usize) -> f64 {
    let n = grid.dim();
    match j {
        0 => 1.0,
        j if j <= n => grid.node(i)[j - 1],
        _ => 0.5 * grid.speed_sq(i),
    }
}

/// `Φ(θ)`, or infinity when the exponential overflows.
fn dual_value(grid: &VelocityGrid, volume: f64, theta: &[f64], c: &[f64]) -> f64 {
    let w = grid.weights();
    let mass = volume * grid.folded_sum(|i| w[i] * exponent(grid, theta, i).exp());
    if !mass.is_finite() {
        return f64::INFINITY;
    }
    mass - theta.iter().zip(c).map(|(t, c)| t * c).sum::<f64>()
}

/// Moments `V Σ w f φ_j` and Hessian `V Σ w f φ_j φ_k` at `θ`.
fn moments_and_hessian(grid: &VelocityGrid, volume: f64, theta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let d = grid.dim() + 2;
    let w = grid.weights();
    let mut m = vec![0.0; d];
    let mut h = DMatrix::zeros(d, d);
    let mut phi = vec![0.0; d];
    for i in 0..grid.len() {
        let f = w[i] * exponent(grid, theta, i).exp();
        if f == 0.0 {
            continue;
        }
        for (j, p) in phi.iter_mut().enumerate() {
            *p = feature(grid, i, j);
        }
        for j in 0..d {
            let fj = f * phi[j];
            m[j] += fj;
            for k in j..d {
                h[(j, k)] += fj * phi[k];
            }
        }
    }
    for j in 0..d {
        m[j] *= volume;
        for k in j..d {
            h[(j, k)] *= volume;
            h[(k, j)] = h[(j, k)];
        }
    }
    (m, h)
}

fn solve_linear(h: DMatrix<f64>, rhs: DVector<f64>) -> Option<DVector<f64>> {
    match h.clone().cholesky() {
        Some(ch) => Some(ch.solve(&rhs)),
        None => h.lu().solve(&rhs),
    }
}

/// Dual point of the continuous Maxwellian with the given density per
/// volume, drift and temperature.
pub fn theta_from_maxwellian(rho_per_volume: f64, u: &[f64], temperature: f64) -> Vec<f64> {
    let n = u.len();
    let u2: f64 = u.iter().map(|v| v * v).sum();
    let mut theta = Vec::with_capacity(n + 2);
    theta.push(rho_per_volume.ln() - 0.5 * n as f64 * (2.0 * PI * temperature).ln() - u2 / (2.0 * temperature));
    theta.extend(u.iter().map(|v| v / temperature));
    theta.push(-1.0 / temperature);
    theta
}

/// Cold start: zero linear coefficients, quadratic coefficient `-1/t_start`,
/// constant chosen so the discrete density matches `targets.rho`.
pub fn cold_start(grid: &VelocityGrid, volume: f64, targets: &MomentTargets, t_start: f64) -> Vec<f64> {
    let n = grid.dim();
    let w = grid.weights();
    let mass = grid.folded_sum(|i| w[i] * (-0.5 * grid.speed_sq(i) / t_start).exp());
    let mut theta = vec![0.0; n + 2];
    theta[0] = (targets.rho / (volume * mass)).ln();
    theta[n + 1] = -1.0 / t_start;
    theta
}

/// Newton iteration on the dual from `theta0`.
pub fn solve(
    grid: &VelocityGrid,
    volume: f64,
    targets: &MomentTargets,
    theta0: Vec<f64>,
    opts: DualOptions,
) -> Result<DualSolution> {
    let d = grid.dim() + 2;
    if targets.momentum.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: targets.momentum.len(),
        });
    }
    if theta0.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: theta0.len(),
        });
    }
    let c = targets.as_vec();
    let threshold = opts.tol * targets.scale();
    let mut theta = theta0;
    let mut value = dual_value(grid, volume, &theta, &c);
    let mut residual = f64::INFINITY;
    for iter in 0..=opts.max_iter {
        let (m, h) = moments_and_hessian(grid, volume, &theta);
        let grad: Vec<f64> = m.iter().zip(&c).map(|(m, c)| m - c).collect();
        residual = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if residual <= threshold {
            return Ok(finish(grid, theta, iter, residual));
        }
        if iter == opts.max_iter {
            break;
        }
        let Some(step) = solve_linear(h, -DVector::from_vec(grad.clone())) else {
            break;
        };
        let slope: f64 = step.iter().zip(&grad).map(|(s, g)| s * g).sum();
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-12 {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + alpha * s).collect();
            let trial_value = dual_value(grid, volume, &trial, &c);
            if trial_value <= value + 1e-4 * alpha * slope {
                theta = trial;
                value = trial_value;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No further decrease representable: take the full step once
            // more only if it does not make the residual worse.
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            let (tm, _) = moments_and_hessian(grid, volume, &trial);
            let tr = tm.iter().zip(&c).fold(0.0f64, |acc, (m, c)| acc.max((m - c).abs()));
            if tr < residual {
                theta = trial;
                value = dual_value(grid, volume, &theta, &c);
            } else {
                break;
            }
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual,
    })
}

fn finish(grid: &VelocityGrid, theta: Vec<f64>, iterations: usize, residual: f64) -> DualSolution {
    let profile = (0..grid.len()).map(|i| exponent(grid, &theta, i).exp()).collect();
    DualSolution {
        theta,
        profile,
        iterations,
        residual,
    }
}
