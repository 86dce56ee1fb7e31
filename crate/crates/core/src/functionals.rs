//! The functional `F = λE + S` with `λ = -1/T`, and the distance
//! `dist{M, f} = F(M) - F(f)` from the global Maxwellian at rest.
//!
//! `λ` never appears as a free parameter: it is always `-1/T` for the
//! temperature of the reference Maxwellian.

use std::f64::consts::PI;
use std::fmt;

use crate::dist::{moments, DistributionField, MaxwellianParams};
use crate::error::{positive, Error, Result};
use crate::par;

/// Default relative tolerance for the equal-density precondition.
pub const DENSITY_REL_TOL: f64 = 1e-6;

/// Floor applied to `f/M` before taking its logarithm.
pub const RATIO_FLOOR: f64 = 1e-300;

/// How the distance was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMethod {
    /// Closed-form `F(M)` minus quadrature `F(f)`.
    Difference,
    /// Quadrature of the non-negative integrand `M - f + f log(f/M)`.
    Bregman,
}

impl DistanceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMethod::Difference => "difference",
            DistanceMethod::Bregman => "bregman",
        }
    }
}

impl fmt::Display for DistanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DistanceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "difference" => Ok(Self::Difference),
            "bregman" => Ok(Self::Bregman),
            other => Err(Error::InvalidParameter {
                name: "method",
                reason: format!("expected `difference` or `bregman`, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub f_m: f64,
    pub f_f: f64,
    pub dist: f64,
    pub rho_m: f64,
    pub rho_f: f64,
    pub method: DistanceMethod,
}

impl DistanceReport {
    /// Flat `key=value` lines, keys `F_M F_f dist rho_M rho_f method`.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        use crate::format::sig12;
        vec![
            ("F_M", sig12(self.f_m)),
            ("F_f", sig12(self.f_f)),
            ("dist", sig12(self.dist)),
            ("rho_M", sig12(self.rho_m)),
            ("rho_f", sig12(self.rho_f)),
            ("method", self.method.to_string()),
        ]
    }
}

/// `F(f) = -E(f)/T + S(f)`.
pub fn functional_f(f: &DistributionField, temperature: f64) -> Result<f64> {
    positive("T", temperature)?;
    let s = moments(f);
    Ok(-s.energy_total / temperature + s.entropy)
}

/// `F(f) = -∫∫ (|ζ|²/2T + log f) f`, the same quantity accumulated as one
/// integrand.
pub fn functional_f_integrand(f: &DistributionField, temperature: f64) -> Result<f64> {
    positive("T", temperature)?;
    let grid = f.grid();
    let w = grid.weights();
    let mut total = 0.0;
    for (c, vol) in f.domain().cell_volumes().iter().enumerate() {
        let profile = f.cell(c);
        let cell = grid.folded_sum(|i| {
            let v = profile[i];
            let log = if v <= crate::dist::ENTROPY_FLOOR { 0.0 } else { v.ln() };
            w[i] * (grid.speed_sq(i) / (2.0 * temperature) + log) * v
        });
        total -= vol * cell;
    }
    Ok(total)
}

/// Closed form of `F` at a Maxwellian with parameters `p`, using
/// `λ = -1/t_ref`.
///
/// With `A = ρ / (V_Ω (2πT)^{n/2})` the entropy of the Maxwellian is
/// `ρ (n/2 - log A)` and its energy `ρ (nT + |u|²)/2`. Hence
///
/// `F = -ρ (log A - n(1 - T/t_ref)/2) - ρ|u|²/(2 t_ref)`.
///
/// For `u = 0, T = t_ref` this is `-ρ log A`. The `|u|²` term comes from
/// completing the square in the energy of a drifted Maxwellian.
pub fn f_maxwellian_closed(p: &MaxwellianParams, t_ref: f64) -> Result<f64> {
    p.validate()?;
    positive("T_ref", t_ref)?;
    let n = p.dim() as f64;
    let log_amp = (p.rho / p.volume).ln() - 0.5 * n * (2.0 * PI * p.temperature).ln();
    Ok(-p.rho * (log_amp - 0.5 * n * (1.0 - p.temperature / t_ref))
        - p.rho * p.speed_sq() / (2.0 * t_ref))
}

fn check_reference(
    m: &MaxwellianParams,
    f: &DistributionField,
    rel_tol: f64,
) -> Result<f64> {
    m.validate()?;
    if m.dim() != f.grid().dim() {
        return Err(Error::DimensionMismatch {
            expected: f.grid().dim(),
            got: m.dim(),
        });
    }
    let speed = m.speed_sq().sqrt();
    if speed > 0.0 {
        return Err(Error::DriftedReference { speed });
    }
    let vol = f.domain().total_volume();
    if (vol - m.volume).abs() > 1e-12 * m.volume {
        return Err(Error::InvalidParameter {
            name: "V_omega",
            reason: format!("reference volume {} differs from field domain {vol}", m.volume),
        });
    }
    let rho_f = moments(f).rho_total;
    if (rho_f - m.rho).abs() > rel_tol * m.rho {
        return Err(Error::DensityMismatch {
            reference: m.rho,
            field: rho_f,
            tolerance: rel_tol,
        });
    }
    Ok(rho_f)
}

/// `dist{M, f} = F(M) - F(f)` with the default density tolerance.
pub fn distance(m: &MaxwellianParams, f: &DistributionField, temperature: f64) -> Result<DistanceReport> {
    distance_with_tolerance(m, f, temperature, DENSITY_REL_TOL)
}

pub fn distance_with_tolerance(
    m: &MaxwellianParams,
    f: &DistributionField,
    temperature: f64,
    rel_tol: f64,
) -> Result<DistanceReport> {
    positive("T", temperature)?;
    if (temperature - m.temperature).abs() > 1e-12 * m.temperature {
        return Err(Error::TemperatureMismatch {
            reference: m.temperature,
            requested: temperature,
        });
    }
    let rho_f = check_reference(m, f, rel_tol)?;
    let f_m = f_maxwellian_closed(m, m.temperature)?;
    let f_f = functional_f(f, m.temperature)?;
    Ok(DistanceReport {
        f_m,
        f_f,
        dist: f_m - f_f,
        rho_m: m.rho,
        rho_f,
        method: DistanceMethod::Difference,
    })
}

/// Pointwise integrand `M - f + f log(f/M)` per (cell, node), without
/// quadrature weights. Non-negative by `1 - x + x log x >= 0`.
pub fn bregman_integrand(m: &MaxwellianParams, f: &DistributionField) -> Vec<f64> {
    let grid = f.grid();
    let profile = grid.sample(|z| m.eval(z));
    let n = grid.len();
    f.values()
        .iter()
        .enumerate()
        .map(|(k, &fv)| {
            let mv = profile[k % n];
            if fv <= 0.0 {
                mv
            } else {
                let ratio = (fv / mv).max(RATIO_FLOOR);
                mv - fv + fv * ratio.ln()
            }
        })
        .collect()
}

/// Distance as the quadrature of the Bregman integrand.
pub fn distance_bregman(m: &MaxwellianParams, f: &DistributionField) -> Result<DistanceReport> {
    distance_bregman_with_tolerance(m, f, DENSITY_REL_TOL)
}

pub fn distance_bregman_with_tolerance(
    m: &MaxwellianParams,
    f: &DistributionField,
    rel_tol: f64,
) -> Result<DistanceReport> {
    let rho_f = check_reference(m, f, rel_tol)?;
    let integrand = bregman_integrand(m, f);
    let grid = f.grid();
    let n = grid.len();
    let dist = f
        .domain()
        .cell_volumes()
        .iter()
        .enumerate()
        .map(|(c, vol)| vol * grid.integrate_unchecked(&integrand[c * n..(c + 1) * n]))
        .sum();
    Ok(DistanceReport {
        f_m: f_maxwellian_closed(m, m.temperature)?,
        f_f: functional_f(f, m.temperature)?,
        dist,
        rho_m: m.rho,
        rho_f,
        method: DistanceMethod::Bregman,
    })
}

/// Distances for a batch of fields, evaluated in parallel when enabled.
pub fn distance_many(
    m: &MaxwellianParams,
    fields: &[DistributionField],
    method: DistanceMethod,
) -> Vec<Result<DistanceReport>> {
    par::map_slice(fields, |f| match method {
        DistanceMethod::Difference => distance(m, f, m.temperature),
        DistanceMethod::Bregman => distance_bregman(m, f),
    })
}

/// `dist{M, M₁}` for two Maxwellians at rest with equal density:
/// `-ρn (log r - r + 1)/2`, `r = T₁/T`.
pub fn dist_maxwellians_closed(temperature: f64, t1: f64, rho: f64, dim: usize) -> Result<f64> {
    positive("T", temperature)?;
    positive("T1", t1)?;
    positive("rho", rho)?;
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    let x = t1 / temperature - 1.0;
    Ok(-0.5 * rho * dim as f64 * (x.ln_1p() - x))
}

/// The two candidate lower bounds for `dist{M, f}` over the moment class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionBound {
    /// Bulk-motion term `|U|²/(2ρT₁)`.
    pub t1_term: f64,
    /// Bulk-motion term `|U|²/(2ρT)`, from evaluating `dist{M, M₁}` for the
    /// drifted `M₁` directly.
    pub t_term: f64,
}

pub fn projection_bound(temperature: f64, t1: f64, rho: f64, momentum: &[f64], dim: usize) -> Result<ProjectionBound> {
    let base = dist_maxwellians_closed(temperature, t1, rho, dim)?;
    if momentum.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: momentum.len(),
        });
    }
    let u2: f64 = momentum.iter().map(|v| v * v).sum();
    Ok(ProjectionBound {
        t1_term: base + u2 / (2.0 * rho * t1),
        t_term: base + u2 / (2.0 * rho * temperature),
    })
}
