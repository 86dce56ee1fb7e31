//! Nearest Maxwellian within a moment class.
//!
//! Among non-negative `f` with total density `ρ`, total energy `E₁` and total
//! momentum `U`, the distance to the reference Maxwellian at rest is
//! minimized by the drifted Maxwellian
//!
//! `M₁ = ρ / (V (2πT₁)^{n/2}) exp(-|ζ - U/ρ|² / 2T₁)`,
//! `T₁ = 2E₁/(nρ) - |U|²/(nρ²)`.
//!
//! The minimizer depends on the class only; the reference temperature enters
//! the attained distance and the multiplier `ν`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dist::{DistributionField, MaxwellianParams};
use crate::error::{positive, Error, Result};
use crate::functionals::f_maxwellian_closed;
use crate::grid::{SpatialDomain, VelocityGrid};
use crate::maxent::{self, DualOptions, MomentTargets};

/// Non-negative fields with fixed total density, energy and momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentClass {
    pub rho: f64,
    pub energy: f64,
    pub momentum: Vec<f64>,
    pub volume: f64,
}

impl MomentClass {
    pub fn new(rho: f64, energy: f64, momentum: Vec<f64>, volume: f64) -> Result<Self> {
        positive("rho", rho)?;
        positive("E1", energy)?;
        positive("V_omega", volume)?;
        if !(1..=3).contains(&momentum.len()) {
            return Err(Error::InvalidDimension(momentum.len()));
        }
        if momentum.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "U",
                reason: "components must be finite".into(),
            });
        }
        Ok(Self {
            rho,
            energy,
            momentum,
            volume,
        })
    }

    /// Class of a Maxwellian with the given density, drift and temperature.
    pub fn of_maxwellian(p: &MaxwellianParams) -> Result<Self> {
        Self::new(p.rho, p.energy(), p.momentum(), p.volume)
    }

    pub fn dim(&self) -> usize {
        self.momentum.len()
    }

    /// `T₁ = 2E₁/(nρ) - |U|²/(nρ²)`; may be non-positive for infeasible data.
    pub fn t1(&self) -> f64 {
        let n = self.dim() as f64;
        let u2: f64 = self.momentum.iter().map(|v| v * v).sum();
        2.0 * self.energy / (n * self.rho) - u2 / (n * self.rho * self.rho)
    }

    pub fn drift(&self) -> Vec<f64> {
        self.momentum.iter().map(|v| v / self.rho).collect()
    }

    fn feasible_t1(&self) -> Result<f64> {
        let t1 = self.t1();
        if t1 > 0.0 && t1.is_finite() {
            Ok(t1)
        } else {
            Err(Error::Infeasible { t1 })
        }
    }

    pub(crate) fn targets(&self) -> MomentTargets {
        MomentTargets {
            rho: self.rho,
            momentum: self.momentum.clone(),
            energy: self.energy,
        }
    }

    /// Velocity grid wide enough for the minimizer: `L = max|u_k| + 8√T₁`.
    pub fn resolving_grid(&self, points_per_axis: usize) -> Result<VelocityGrid> {
        let t1 = self.feasible_t1()?;
        let drift = self.drift().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        VelocityGrid::new(self.dim(), drift + 8.0 * t1.sqrt(), points_per_axis)
    }
}

/// Lagrange multipliers of the extremal problem.
///
/// The Euler equation gives `f = exp((λ+ν)|ζ|²/2 + Σγ_k ζ_k + μ - 1)` with
/// `λ = -1/T_ref`. `c = e^{μ-1}` is the prefactor of that form and `c1` the
/// prefactor once the square is completed, which equals `ρ/V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub nu: f64,
    pub gamma: Vec<f64>,
    pub mu: f64,
    pub c: f64,
    pub c1: f64,
}

impl Multipliers {
    fn from_theta(theta: &[f64], t_ref: f64) -> Self {
        let n = theta.len() - 2;
        let quad = theta[n + 1];
        let gamma = theta[1..=n].to_vec();
        let g2: f64 = gamma.iter().map(|g| g * g).sum();
        let c = theta[0].exp();
        let c1 = c * (2.0 * PI / -quad).powf(n as f64 / 2.0) * (-g2 / (2.0 * quad)).exp();
        Self {
            nu: quad + 1.0 / t_ref,
            gamma,
            mu: theta[0] + 1.0,
            c,
            c1,
        }
    }

    /// `λ + ν`, the coefficient of `|ζ|²/2`.
    pub fn quadratic(&self, t_ref: f64) -> f64 {
        self.nu - 1.0 / t_ref
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// The nearest Maxwellian `M₁`.
    pub minimizer: MaxwellianParams,
    pub t1: f64,
    /// `dist{M, M₁}` for the reference `M` at rest with temperature `T_ref`.
    pub dist_min: f64,
    pub multipliers: Multipliers,
}

/// Reference Maxwellian at rest sharing the class density and volume.
pub fn reference_for(class: &MomentClass, t_ref: f64) -> Result<MaxwellianParams> {
    MaxwellianParams::at_rest(class.rho, t_ref, class.volume, class.dim())
}

/// Closed-form minimizer of the distance over the class.
pub fn project(class: &MomentClass, t_ref: f64) -> Result<ProjectionResult> {
    positive("T_ref", t_ref)?;
    let t1 = class.feasible_t1()?;
    let minimizer = MaxwellianParams::new(class.rho, class.drift(), t1, class.volume)?;
    let reference = reference_for(class, t_ref)?;
    let dist_min = f_maxwellian_closed(&reference, t_ref)? - f_maxwellian_closed(&minimizer, t_ref)?;
    let theta = maxent::theta_from_maxwellian(class.rho / class.volume, &minimizer.u, t1);
    Ok(ProjectionResult {
        minimizer,
        t1,
        dist_min,
        multipliers: Multipliers::from_theta(&theta, t_ref),
    })
}

/// Result of solving the discretized extremal problem directly.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Minimizing velocity profile (per unit of spatial volume already
    /// divided out: this is the phase-space density).
    pub profile: Vec<f64>,
    pub multipliers: Multipliers,
    pub iterations: usize,
    pub residual: f64,
}

/// Maximize `F` over non-negative grid fields subject to the class
/// constraints, by Newton on the dual from a cold start at `T_ref`.
pub fn project_oracle(class: &MomentClass, t_ref: f64, grid: &VelocityGrid) -> Result<OracleResult> {
    project_oracle_with(class, t_ref, grid, DualOptions::default())
}

pub fn project_oracle_with(
    class: &MomentClass,
    t_ref: f64,
    grid: &VelocityGrid,
    opts: DualOptions,
) -> Result<OracleResult> {
    positive("T_ref", t_ref)?;
    class.feasible_t1()?;
    if grid.dim() != class.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: class.dim(),
        });
    }
    let targets = class.targets();
    let theta0 = maxent::cold_start(grid, class.volume, &targets, t_ref);
    let sol = maxent::solve(grid, class.volume, &targets, theta0, opts)?;
    Ok(OracleResult {
        multipliers: Multipliers::from_theta(&sol.theta, t_ref),
        profile: sol.profile,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

/// Infimum of the distance over the class, attained at `M₁`.
pub fn dist_lower_bound_over_class(class: &MomentClass, t_ref: f64) -> Result<f64> {
    Ok(project(class, t_ref)?.dist_min)
}

/// Random member of the class near `M₁`.
///
/// The perturbation is `M₁ h` where `h` is a random combination of
/// degree-2..4 monomials in `ξ = (ζ - u)/√T₁` under a `exp(-|ξ|²/4)`
/// envelope, with its components along `{1, ζ_k, |ζ|²}` removed in the
/// `M₁`-weighted inner product. The moments of `M₁ (1 + s h)` therefore equal
/// those of `M₁` on the grid. `s` is drawn from `[amplitude/10, amplitude]` and capped so
/// that `1 + s h >= 0.1`.
pub fn sample_class_member<R: Rng + ?Sized>(
    minimizer: &MaxwellianParams,
    grid: &VelocityGrid,
    domain: &SpatialDomain,
    amplitude: f64,
    rng: &mut R,
) -> Result<DistributionField> {
    positive("amplitude", amplitude)?;
    let n = grid.dim();
    if minimizer.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: minimizer.dim(),
        });
    }
    let base = grid.sample(|z| minimizer.eval(z));
    let sd = minimizer.temperature.sqrt();
    let monomials = monomial_exponents(n);
    let coeffs: Vec<f64> = monomials.iter().map(|_| rng.sample(StandardNormal)).collect();
    let mut h: Vec<f64> = (0..grid.len())
        .map(|i| {
            let z = grid.node(i);
            let xi: Vec<f64> = (0..n).map(|a| (z[a] - minimizer.u[a]) / sd).collect();
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            let poly: f64 = monomials
                .iter()
                .zip(&coeffs)
                .map(|(e, c)| c * e.iter().zip(&xi).map(|(&k, x)| x.powi(k)).product::<f64>())
                .sum();
            poly * (-r2 / 4.0).exp()
        })
        .collect();

    // Remove the span of the collision invariants.
    let d = n + 2;
    let invariant = |i: usize, j: usize| match j {
        0 => 1.0,
        j if j <= n => grid.node(i)[j - 1],
        _ => grid.speed_sq(i),
    };
    let w = grid.weights();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(d, d);
    let mut rhs = nalgebra::DVector::<f64>::zeros(d);
    for i in 0..grid.len() {
        let wm = w[i] * base[i];
        for j in 0..d {
            rhs[j] += wm * h[i] * invariant(i, j);
            for k in 0..d {
                gram[(j, k)] += wm * invariant(i, j) * invariant(i, k);
            }
        }
    }
    let a = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidParameter {
            name: "grid",
            reason: "invariant Gram matrix is singular".into(),
        })?;
    for (i, hv) in h.iter_mut().enumerate() {
        *hv -= (0..d).map(|j| a[j] * invariant(i, j)).sum::<f64>();
    }

    let most_negative = h.iter().fold(0.0f64, |acc, v| acc.min(*v));
    let mut s = amplitude * (0.1 + 0.9 * rng.random::<f64>());
    if most_negative < 0.0 {
        s = s.min(0.9 / -most_negative);
    }
    let profile: Vec<f64> = base.iter().zip(&h).map(|(m, hv)| m * (1.0 + s * hv)).collect();
    DistributionField::homogeneous(grid.clone(), domain.clone(), &profile)
}

/// Exponent tuples of all monomials of total degree 2..=4 in `n` variables.
fn monomial_exponents(n: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut current = vec![0i32; n];
    fn rec(pos: usize, left: i32, current: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if pos == current.len() {
            let deg = current.iter().sum::<i32>();
            if (2..=4).contains(&deg) {
                out.push(current.clone());
            }
            return;
        }
        for k in 0..=left {
            current[pos] = k;
            rec(pos + 1, left - k, current, out);
        }
        current[pos] = 0;
    }
    rec(0, 4, &mut current, &mut out);
    out
}
