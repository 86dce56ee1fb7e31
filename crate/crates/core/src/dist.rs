//! Distribution fields, the Maxwellian family, and moment extraction.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{positive, Error, Result};
use crate::grid::{SpatialDomain, VelocityGrid};

/// Values at or below this are treated as exactly zero in `f log f`.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// Parameters of a global Maxwellian: total density, bulk velocity,
/// temperature and domain volume.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellianParams {
    pub rho: f64,
    pub u: Vec<f64>,
    pub temperature: f64,
    pub volume: f64,
}

impl MaxwellianParams {
    pub fn new(rho: f64, u: Vec<f64>, temperature: f64, volume: f64) -> Result<Self> {
        let p = Self {
            rho,
            u,
            temperature,
            volume,
        };
        p.validate()?;
        Ok(p)
    }

    /// Maxwellian at rest in `dim` dimensions.
    pub fn at_rest(rho: f64, temperature: f64, volume: f64, dim: usize) -> Result<Self> {
        Self::new(rho, vec![0.0; dim], temperature, volume)
    }

    pub fn validate(&self) -> Result<()> {
        positive("rho", self.rho)?;
        positive("T", self.temperature)?;
        positive("V_omega", self.volume)?;
        if !(1..=3).contains(&self.u.len()) {
            return Err(Error::InvalidDimension(self.u.len()));
        }
        if self.u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "u",
                reason: "components must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn speed_sq(&self) -> f64 {
        self.u.iter().map(|v| v * v).sum()
    }

    /// Peak phase-space density `ρ / (V_Ω (2πT)^{n/2})`.
    pub fn amplitude(&self) -> f64 {
        self.rho / (self.volume * (2.0 * PI * self.temperature).powf(self.dim() as f64 / 2.0))
    }

    /// Total energy `ρ (nT + |u|²) / 2`.
    pub fn energy(&self) -> f64 {
        0.5 * self.rho * (self.dim() as f64 * self.temperature + self.speed_sq())
    }

    /// Total momentum `ρ u`.
    pub fn momentum(&self) -> Vec<f64> {
        self.u.iter().map(|v| self.rho * v).collect()
    }

    /// Density at velocity `zeta`.
    pub fn eval(&self, zeta: &[f64]) -> f64 {
        let d2: f64 = zeta.iter().zip(&self.u).map(|(z, u)| (z - u).powi(2)).sum();
        self.amplitude() * (-d2 / (2.0 * self.temperature)).exp()
    }
}

/// Non-negative samples `f(x-cell, ζ-node)` at a single time.
#[derive(Debug, Clone)]
pub struct DistributionField {
    grid: VelocityGrid,
    domain: SpatialDomain,
    values: Vec<f64>,
}

impl DistributionField {
    /// Validates shape, finiteness and non-negativity.
    pub fn new(grid: VelocityGrid, domain: SpatialDomain, values: Vec<f64>) -> Result<Self> {
        let expected = grid.len() * domain.cells();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value < 0.0 {
                return Err(Error::NegativeValue {
                    index,
                    cell: index / grid.len(),
                    node: index % grid.len(),
                    value,
                });
            }
        }
        Ok(Self {
            grid,
            domain,
            values,
        })
    }

    /// Same velocity profile in every cell.
    pub fn homogeneous(grid: VelocityGrid, domain: SpatialDomain, profile: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(profile.len() * domain.cells());
        for _ in 0..domain.cells() {
            values.extend_from_slice(profile);
        }
        Self::new(grid, domain, values)
    }

    pub fn zeros(grid: VelocityGrid, domain: SpatialDomain) -> Self {
        let values = vec![0.0; grid.len() * domain.cells()];
        Self {
            grid,
            domain,
            values,
        }
    }

    pub(crate) fn from_parts_unchecked(
        grid: VelocityGrid,
        domain: SpatialDomain,
        values: Vec<f64>,
    ) -> Self {
        Self {
            grid,
            domain,
            values,
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn domain(&self) -> &SpatialDomain {
        &self.domain
    }

    /// All values, cell-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Velocity profile of one cell.
    pub fn cell(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[c * n..(c + 1) * n]
    }

    /// Same grid and domain, new values (validated).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), self.domain.clone(), values)
    }

    /// Largest absolute pointwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Field obtained by `ζ -> -ζ` in every cell.
    pub fn reflected(&self) -> Self {
        let n = self.grid.len();
        let mut values = vec![0.0; self.values.len()];
        for c in 0..self.domain.cells() {
            for i in 0..n {
                values[c * n + self.grid.mirror(i)] = self.values[c * n + i];
            }
        }
        Self::from_parts_unchecked(self.grid.clone(), self.domain.clone(), values)
    }

    /// Writes the text field format: a header `n n_x m L cells` followed by
    /// all values, cell-major, at 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{} {} {} {} {}",
            self.grid.dim(),
            self.domain.spatial_dim(),
            self.grid.points_per_axis(),
            crate::format::exact(self.grid.extent()),
            self.domain.cells()
        )?;
        let m = self.grid.points_per_axis();
        for row in self.values.chunks(m) {
            let line: Vec<String> = row.iter().map(|v| crate::format::exact(*v)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Reads the text field format. The header fixes the grid and the cell
    /// count; cell volumes come from `volume`, split evenly.
    pub fn read_text<R: BufRead>(input: R, volume: f64) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut header: Option<Vec<String>> = None;
        for line in input.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if header.is_none() {
                header = Some(trimmed.split_whitespace().map(str::to_owned).collect());
            } else {
                tokens.extend(trimmed.split_whitespace().map(str::to_owned));
            }
        }
        let header = header.ok_or_else(|| Error::Format("empty file".into()))?;
        if header.len() != 5 {
            return Err(Error::Format(format!(
                "header must be `n n_x m L cells`, got {} fields",
                header.len()
            )));
        }
        let int = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Format(format!("bad {what} `{s}` in header")))
        };
        let n = int(&header[0], "n")?;
        let n_x = int(&header[1], "n_x")?;
        let m = int(&header[2], "m")?;
        let extent: f64 = header[3]
            .parse()
            .map_err(|_| Error::Format(format!("bad L `{}` in header", header[3])))?;
        let cells = int(&header[4], "cells")?;
        if n_x != 1 {
            return Err(Error::Format(format!("only n_x = 1 is supported (got {n_x})")));
        }
        let grid = VelocityGrid::new(n, extent, m)?;
        let domain = SpatialDomain::uniform(cells, volume)?;
        let values = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad value `{t}` at index {i}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(grid, domain, values)
    }
}

/// Moments of a field: total density, total momentum, total energy, entropy
/// and the per-cell mean velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub rho_total: f64,
    pub momentum: Vec<f64>,
    pub energy_total: f64,
    pub entropy: f64,
    pub mean_u_per_cell: Vec<Vec<f64>>,
}

/// Velocity moments of a single profile: `(∫f, ∫ζf, ∫|ζ|²f/2)`.
pub(crate) fn profile_moments(grid: &VelocityGrid, profile: &[f64]) -> (f64, Vec<f64>, f64) {
    let rho = grid.integrate_unchecked(profile);
    let momentum = (0..grid.dim())
        .map(|a| grid.integrate_with(profile, |i| grid.node(i)[a]))
        .collect();
    let energy = 0.5 * grid.integrate_with(profile, |i| grid.speed_sq(i));
    (rho, momentum, energy)
}

pub(crate) fn profile_entropy(grid: &VelocityGrid, profile: &[f64]) -> f64 {
    let w = grid.weights();
    -grid.folded_sum(|i| {
        let f = profile[i];
        if f <= ENTROPY_FLOOR {
            0.0
        } else {
            w[i] * f * f.ln()
        }
    })
}

/// Global Maxwellian sampled on the grid, identical in every cell.
pub fn maxwellian_eval(
    p: &MaxwellianParams,
    grid: &VelocityGrid,
    domain: &SpatialDomain,
) -> Result<DistributionField> {
    p.validate()?;
    if p.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: p.dim(),
        });
    }
    if (domain.total_volume() - p.volume).abs() > 1e-12 * p.volume {
        return Err(Error::InvalidParameter {
            name: "V_omega",
            reason: format!(
                "Maxwellian volume {} differs from domain volume {}",
                p.volume,
                domain.total_volume()
            ),
        });
    }
    let profile = grid.sample(|z| p.eval(z));
    DistributionField::homogeneous(grid.clone(), domain.clone(), &profile)
}

/// Local Maxwellian `ρ (2πT)^{-n/2} exp(-|ζ-u|²/2T)` at every node, without
/// the volume normalization.
pub fn local_maxwellian(rho: f64, u: &[f64], temperature: f64, grid: &VelocityGrid) -> Result<Vec<f64>> {
    positive("T", temperature)?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("must be non-negative (got {rho})"),
        });
    }
    if u.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: u.len(),
        });
    }
    if rho == 0.0 {
        return Ok(vec![0.0; grid.len()]);
    }
    let amp = rho / (2.0 * PI * temperature).powf(grid.dim() as f64 / 2.0);
    Ok(grid.sample(|z| {
        let d2: f64 = z.iter().zip(u).map(|(z, u)| (z - u).powi(2)).sum();
        amp * (-d2 / (2.0 * temperature)).exp()
    }))
}

/// Quadrature moments over velocity, then over cells.
///
/// A cell with zero density reports a zero mean velocity.
pub fn moments(f: &DistributionField) -> MomentSummary {
    let grid = f.grid();
    let n = grid.dim();
    let mut rho_total = 0.0;
    let mut momentum = vec![0.0; n];
    let mut energy_total = 0.0;
    let mut entropy = 0.0;
    let mut mean_u_per_cell = Vec::with_capacity(f.domain().cells());
    for (c, &vol) in f.domain().cell_volumes().iter().enumerate() {
        let profile = f.cell(c);
        let (rho, mom, energy) = profile_moments(grid, profile);
        rho_total += vol * rho;
        for a in 0..n {
            momentum[a] += vol * mom[a];
        }
        energy_total += vol * energy;
        entropy += vol * profile_entropy(grid, profile);
        mean_u_per_cell.push(if rho > 0.0 {
            mom.iter().map(|m| m / rho).collect()
        } else {
            vec![0.0; n]
        });
    }
    MomentSummary {
        rho_total,
        momentum,
        energy_total,
        entropy,
        mean_u_per_cell,
    }
}

/// `S = -∫∫ f log f`, with `0 log 0 = 0`.
pub fn entropy(f: &DistributionField) -> f64 {
    let grid = f.grid();
    f.domain()
        .cell_volumes()
        .iter()
        .enumerate()
        .map(|(c, vol)| vol * profile_entropy(grid, f.cell(c)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_domain() -> SpatialDomain {
        SpatialDomain::homogeneous(1.0).unwrap()
    }

    #[test]
    fn peak_value() {
        let g = VelocityGrid::new(1, 8.0, 257).unwrap();
        let p = MaxwellianParams::at_rest(1.0, 1.0, 1.0, 1).unwrap();
        let f = maxwellian_eval(&p, &g, &unit_domain()).unwrap();
        assert_eq!(g.node(128)[0], 0.0);
        assert_abs_diff_eq!(f.values()[128], 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn maxwellian_density_and_drift() {
        let g = VelocityGrid::new(1, 8.0, 256).unwrap();
        let p = MaxwellianParams::at_rest(1.0, 1.0, 1.0, 1).unwrap();
        let s = moments(&maxwellian_eval(&p, &g, &unit_domain()).unwrap());
        assert_abs_diff_eq!(s.rho_total, 1.0, epsilon = 1e-8);

        // Shifted Gaussian: the box must cover the drift plus 8 thermal widths.
        let g2 = VelocityGrid::new(2, 10.0, 80).unwrap();
        let p2 = MaxwellianParams::new(1.0, vec![2.0, 0.0], 1.0, 1.0).unwrap();
        let s2 = moments(&maxwellian_eval(&p2, &g2, &unit_domain()).unwrap());
        assert_abs_diff_eq!(s2.mean_u_per_cell[0][0], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s2.mean_u_per_cell[0][1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = VelocityGrid::new(2, 8.0, 16).unwrap();
        let p = MaxwellianParams::at_rest(1.0, 1.0, 1.0, 1).unwrap();
        assert!(matches!(
            maxwellian_eval(&p, &g, &unit_domain()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn local_maxwellian_cases() {
        let g1 = VelocityGrid::new(1, 8.0, 256).unwrap();
        assert!(local_maxwellian(0.0, &[0.0], 1.0, &g1)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let m = local_maxwellian(1.0, &[0.0], 1.0, &g1).unwrap();
        assert_abs_diff_eq!(g1.integrate(&m).unwrap(), 1.0, epsilon = 1e-8);
        assert!(local_maxwellian(1.0, &[0.0], 0.0, &g1).is_err());
        assert!(local_maxwellian(1.0, &[0.0], -1.0, &g1).is_err());

        let g3 = VelocityGrid::new(3, 8.0 * 2f64.sqrt(), 48).unwrap();
        let m3 = local_maxwellian(1.0, &[0.0; 3], 2.0, &g3).unwrap();
        let (_, _, e) = profile_moments(&g3, &m3);
        assert_abs_diff_eq!(e, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn moments_of_maxwellians() {
        let g = VelocityGrid::new(1, 9.0, 256).unwrap();
        let p = MaxwellianParams::at_rest(2.0, 1.0, 1.0, 1).unwrap();
        let s = moments(&maxwellian_eval(&p, &g, &unit_domain()).unwrap());
        assert_abs_diff_eq!(s.rho_total, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.momentum[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.energy_total, 1.0, epsilon = 1e-6);

        let p = MaxwellianParams::new(1.0, vec![1.0], 1.0, 1.0).unwrap();
        let s = moments(&maxwellian_eval(&p, &g, &unit_domain()).unwrap());
        assert_abs_diff_eq!(s.momentum[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.energy_total, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn empty_gas() {
        let g = VelocityGrid::new(2, 4.0, 8).unwrap();
        let f = DistributionField::zeros(g, SpatialDomain::uniform(3, 1.0).unwrap());
        let s = moments(&f);
        assert_eq!(s.rho_total, 0.0);
        assert_eq!(s.energy_total, 0.0);
        assert_eq!(s.entropy, 0.0);
        assert_eq!(s.momentum, vec![0.0, 0.0]);
        assert!(s.mean_u_per_cell.iter().all(|u| u == &vec![0.0, 0.0]));
    }

    #[test]
    fn entropy_cases() {
        // f ≡ 1 on the box [-0.5, 0.5] with unit volume.
        let g = VelocityGrid::new(1, 0.5, 10).unwrap();
        let f = DistributionField::homogeneous(g, unit_domain(), &[1.0; 10]).unwrap();
        assert_abs_diff_eq!(entropy(&f), 0.0, epsilon = 1e-15);

        let g = VelocityGrid::new(1, 8.0, 256).unwrap();
        let p = MaxwellianParams::at_rest(1.0, 1.0, 1.0, 1).unwrap();
        let m = maxwellian_eval(&p, &g, &unit_domain()).unwrap();
        let s = entropy(&m);
        assert_abs_diff_eq!(s, 0.5 + 0.5 * (2.0 * PI).ln(), epsilon = 1e-6);

        let doubled: Vec<f64> = m.values().iter().map(|v| 2.0 * v).collect();
        let s2 = entropy(&m.with_values(doubled).unwrap());
        assert_abs_diff_eq!(s2, 2.0 * s - 2.0 * 2f64.ln(), epsilon = 1e-6);
    }

    #[test]
    fn field_validation() {
        let g = VelocityGrid::new(1, 1.0, 4).unwrap();
        let err = DistributionField::new(g.clone(), unit_domain(), vec![0.1, 0.2, -0.3, 0.0])
            .unwrap_err();
        assert!(matches!(err, Error::NegativeValue { index: 2, .. }));
        assert!(DistributionField::new(g.clone(), unit_domain(), vec![0.0; 3]).is_err());
        assert!(DistributionField::new(g, unit_domain(), vec![0.0, f64::INFINITY, 0.0, 0.0]).is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let g = VelocityGrid::new(2, 3.7, 5).unwrap();
        let d = SpatialDomain::uniform(2, 1.5).unwrap();
        let values: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin().abs() / 3.0).collect();
        let f = DistributionField::new(g, d, values).unwrap();
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2 1 5 3.7000000000000002e0 2\n"));
        let back = DistributionField::read_text(&buf[..], 1.5).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid().extent(), 3.7);
        assert_eq!(back.domain().cells(), 2);
    }

    #[test]
    fn read_reports_negative_index() {
        let text = "1 1 2 1 1\n0.5 -0.25\n";
        let err = DistributionField::read_text(text.as_bytes(), 1.0).unwrap_err();
        assert!(matches!(err, Error::NegativeValue { index: 1, .. }));
        assert!(DistributionField::read_text("1 1 2\n".as_bytes(), 1.0).is_err());
    }

    proptest! {
        #[test]
        fn linear_moments_are_linear(
            a in 0.0f64..3.0,
            b in 0.0f64..3.0,
            u in -1.0f64..1.0,
        ) {
            let g = VelocityGrid::new(2, 6.0, 24).unwrap();
            let d = SpatialDomain::uniform(2, 2.0).unwrap();
            let f1 = DistributionField::homogeneous(
                g.clone(), d.clone(), &local_maxwellian(1.0, &[u, 0.0], 1.0, &g).unwrap()).unwrap();
            let f2 = DistributionField::homogeneous(
                g.clone(), d.clone(), &local_maxwellian(0.5, &[0.0, -u], 0.6, &g).unwrap()).unwrap();
            let combo: Vec<f64> = f1.values().iter().zip(f2.values()).map(|(x, y)| a * x + b * y).collect();
            let sc = moments(&f1.with_values(combo).unwrap());
            let s1 = moments(&f1);
            let s2 = moments(&f2);
            let tol = 1e-12;
            prop_assert!((sc.rho_total - (a * s1.rho_total + b * s2.rho_total)).abs() < tol);
            prop_assert!((sc.energy_total - (a * s1.energy_total + b * s2.energy_total)).abs() < tol);
            for k in 0..2 {
                prop_assert!((sc.momentum[k] - (a * s1.momentum[k] + b * s2.momentum[k])).abs() < tol);
            }
        }

        #[test]
        fn entropy_reflection_invariant(
            u0 in -1.5f64..1.5,
            u1 in -1.5f64..1.5,
            t in 0.4f64..2.0,
        ) {
            let g = VelocityGrid::new(2, 8.0, 20).unwrap();
            let d = SpatialDomain::homogeneous(1.0).unwrap();
            let f = DistributionField::homogeneous(
                g.clone(), d, &local_maxwellian(1.3, &[u0, u1], t, &g).unwrap()).unwrap();
            prop_assert!((entropy(&f) - entropy(&f.reflected())).abs() < 1e-12);
        }
    }
}
