//! Velocity-space and spatial discretization.
//!
//! Velocity space is truncated to the box `[-L, L]^n` and sampled with a
//! tensor-product midpoint rule. Node `k` on an axis sits at
//! `-L + (k + 1/2) h` with `h = 2L / m`, every node carries weight `h^n`, and
//! the node set is symmetric under `ζ -> -ζ`. Flat node indices are
//! row-major: the first axis varies slowest.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{positive, Error, Result};

/// Largest velocity dimension supported.
pub const MAX_DIM: usize = 3;

#[derive(Debug)]
struct GridData {
    dim: usize,
    extent: f64,
    points_per_axis: usize,
    spacing: f64,
    axis: Vec<f64>,
    coords: Vec<f64>,
    speed_sq: Vec<f64>,
    weights: Vec<f64>,
}

/// Uniform symmetric tensor-product grid over the truncated velocity box.
///
/// Cheap to clone: the node tables are shared.
#[derive(Debug, Clone)]
pub struct VelocityGrid {
    inner: Arc<GridData>,
}

impl PartialEq for VelocityGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim()
                && self.extent() == other.extent()
                && self.points_per_axis() == other.points_per_axis())
    }
}

impl VelocityGrid {
    /// Midpoint tensor grid with `m` nodes per axis on `[-extent, extent]^dim`.
    pub fn new(dim: usize, extent: f64, m: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        positive("L", extent)?;
        if m < 2 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("need at least 2 points per axis (got {m})"),
            });
        }
        let spacing = 2.0 * extent / m as f64;
        // k and m-1-k are mirror images; computing from the nearer end keeps
        // the node set exactly symmetric in floating point.
        let axis: Vec<f64> = (0..m)
            .map(|k| {
                let mirror = m - 1 - k;
                if k <= mirror {
                    -extent + (k as f64 + 0.5) * spacing
                } else {
                    extent - (mirror as f64 + 0.5) * spacing
                }
            })
            .collect();
        let len = m.pow(dim as u32);
        let mut coords = Vec::with_capacity(len * dim);
        let mut speed_sq = Vec::with_capacity(len);
        for i in 0..len {
            let mut rest = i;
            let mut node = [0.0; MAX_DIM];
            for a in (0..dim).rev() {
                node[a] = axis[rest % m];
                rest /= m;
            }
            coords.extend_from_slice(&node[..dim]);
            speed_sq.push(node[..dim].iter().map(|v| v * v).sum());
        }
        let weights = vec![spacing.powi(dim as i32); len];
        Ok(Self {
            inner: Arc::new(GridData {
                dim,
                extent,
                points_per_axis: m,
                spacing,
                axis,
                coords,
                speed_sq,
                weights,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Half-width `L` of the truncation box.
    pub fn extent(&self) -> f64 {
        self.inner.extent
    }

    pub fn points_per_axis(&self) -> usize {
        self.inner.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    /// Total number of velocity nodes, `m^n`.
    pub fn len(&self) -> usize {
        self.inner.speed_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One-dimensional node coordinates shared by every axis.
    pub fn axis(&self) -> &[f64] {
        &self.inner.axis
    }

    /// Coordinates of node `i`.
    pub fn node(&self, i: usize) -> &[f64] {
        let n = self.inner.dim;
        &self.inner.coords[i * n..(i + 1) * n]
    }

    /// `|ζ|²` at node `i`.
    pub fn speed_sq(&self, i: usize) -> f64 {
        self.inner.speed_sq[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.inner.weights
    }

    /// Index of the node `-ζ_i`.
    pub fn mirror(&self, i: usize) -> usize {
        let m = self.inner.points_per_axis;
        let mut rest = i;
        let mut out = 0;
        let mut stride = 1;
        for _ in 0..self.inner.dim {
            let k = rest % m;
            out += (m - 1 - k) * stride;
            rest /= m;
            stride *= m;
        }
        out
    }

    /// Quadrature `Σ w_i v_i`.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(self.integrate_unchecked(values))
    }

    pub(crate) fn integrate_unchecked(&self, values: &[f64]) -> f64 {
        let w = &self.inner.weights;
        self.folded_sum(|i| w[i] * values[i])
    }

    /// Quadrature of `g(i) * values[i]` without materializing `g`.
    pub(crate) fn integrate_with<G: Fn(usize) -> f64>(&self, values: &[f64], g: G) -> f64 {
        let w = &self.inner.weights;
        self.folded_sum(|i| w[i] * values[i] * g(i))
    }

    /// Sum of `term(i)` over all nodes, adding each node to its mirror
    /// (flat index `N-1-i`) first. Odd integrands then cancel exactly.
    pub(crate) fn folded_sum<T: Fn(usize) -> f64>(&self, term: T) -> f64 {
        let len = self.len();
        let mut acc = 0.0;
        for i in 0..len / 2 {
            acc += term(i) + term(len - 1 - i);
        }
        if len % 2 == 1 {
            acc += term(len / 2);
        }
        acc
    }

    /// Evaluate `g` at every node.
    pub fn sample<G: Fn(&[f64]) -> f64>(&self, g: G) -> Vec<f64> {
        (0..self.len()).map(|i| g(self.node(i))).collect()
    }

    /// Multilinear interpolation of nodal `values` at `point`.
    ///
    /// Nodes outside the grid are treated as carrying value zero, so the
    /// interpolant decays linearly to zero across the half-cell next to the
    /// box boundary and vanishes beyond it.
    pub fn interpolate(&self, values: &[f64], point: &[f64]) -> f64 {
        self.interpolate_with(values, point, Interpolation::Multilinear)
    }

    /// Tensor-product interpolation of nodal `values` at `point` with the
    /// given per-axis stencil. Zero outside the box; stencil nodes that fall
    /// outside the grid contribute zero.
    pub fn interpolate_with(&self, values: &[f64], point: &[f64], scheme: Interpolation) -> f64 {
        let g = &*self.inner;
        let m = g.points_per_axis as isize;
        let width = scheme.width();
        let mut idx = [[0isize; 4]; MAX_DIM];
        let mut wts = [[0.0; 4]; MAX_DIM];
        for a in 0..g.dim {
            if point[a].abs() > g.extent {
                return 0.0;
            }
            let s = (point[a] + g.extent) / g.spacing - 0.5;
            let k0 = s.floor() as isize;
            let t = s - k0 as f64;
            let first = k0 - (width as isize / 2 - 1);
            for j in 0..width {
                idx[a][j] = first + j as isize;
            }
            match scheme {
                Interpolation::Multilinear => {
                    wts[a][0] = 1.0 - t;
                    wts[a][1] = t;
                }
                Interpolation::Cubic => {
                    // Lagrange weights on nodes k0-1, k0, k0+1, k0+2.
                    wts[a][0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
                    wts[a][1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
                    wts[a][2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
                    wts[a][3] = (t + 1.0) * t * (t - 1.0) / 6.0;
                }
            }
        }
        let mut acc = 0.0;
        let combos = width.pow(g.dim as u32);
        'corner: for corner in 0..combos {
            let mut rest = corner;
            let mut flat = 0isize;
            let mut weight = 1.0;
            for a in 0..g.dim {
                let j = rest % width;
                rest /= width;
                let k = idx[a][j];
                if k < 0 || k >= m {
                    continue 'corner;
                }
                flat = flat * m + k;
                weight *= wts[a][j];
            }
            if weight != 0.0 {
                acc += weight * values[flat as usize];
            }
        }
        acc
    }
}

/// Stencil used to evaluate a nodal field between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Two nodes per axis; exact for affine data.
    Multilinear,
    /// Four-node Lagrange per axis; exact for cubic data.
    #[default]
    Cubic,
}

impl Interpolation {
    fn width(self) -> usize {
        match self {
            Interpolation::Multilinear => 2,
            Interpolation::Cubic => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Interpolation::Multilinear => "multilinear",
            Interpolation::Cubic => "cubic",
        }
    }
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multilinear" | "linear" => Ok(Self::Multilinear),
            "cubic" => Ok(Self::Cubic),
            other => Err(Error::InvalidParameter {
                name: "interpolation",
                reason: format!("expected `multilinear` or `cubic`, got `{other}`"),
            }),
        }
    }
}

/// Bounded spatial domain split into piecewise-constant cells (one spatial axis).
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDomain {
    cell_volumes: Vec<f64>,
    total_volume: f64,
}

impl SpatialDomain {
    /// Single-cell domain: the spatially homogeneous setting.
    pub fn homogeneous(volume: f64) -> Result<Self> {
        Self::from_cells(vec![volume])
    }

    /// `cells` equal cells sharing `volume`.
    pub fn uniform(cells: usize, volume: f64) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidParameter {
                name: "cells",
                reason: "need at least one cell".into(),
            });
        }
        positive("V_omega", volume)?;
        Self::from_cells(vec![volume / cells as f64; cells])
    }

    pub fn from_cells(cell_volumes: Vec<f64>) -> Result<Self> {
        if cell_volumes.is_empty() {
            return Err(Error::InvalidParameter {
                name: "cells",
                reason: "need at least one cell".into(),
            });
        }
        for &v in &cell_volumes {
            positive("cell volume", v)?;
        }
        let total_volume = cell_volumes.iter().sum();
        Ok(Self {
            cell_volumes,
            total_volume,
        })
    }

    /// Spatial dimension; always 1 at desk scale.
    pub fn spatial_dim(&self) -> usize {
        1
    }

    pub fn cells(&self) -> usize {
        self.cell_volumes.len()
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    /// `V_Ω`.
    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }
}

/// Quadrature rule on the unit sphere `S^{n-1}` for the collision angle σ.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    directions: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    /// `k` directions on `S^{n-1}`.
    ///
    /// For `n = 2` the directions are equispaced angles `2πj/k`. For `n = 3`
    /// they follow a Fibonacci spiral; when `k` is even the spiral is built on
    /// `k/2` points and completed with their antipodes so the rule is
    /// symmetric under `σ -> -σ`.
    pub fn new(dim: usize, k: usize) -> Result<Self> {
        if dim == 1 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "collision directions need n >= 2".into(),
            });
        }
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if k < 4 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("need at least 4 directions (got {k})"),
            });
        }
        let mut directions = Vec::with_capacity(k * dim);
        if dim == 2 {
            for j in 0..k {
                let theta = 2.0 * PI * j as f64 / k as f64;
                directions.extend_from_slice(&[theta.cos(), theta.sin()]);
            }
        } else {
            let golden = PI * (3.0 - 5f64.sqrt());
            let spiral = |count: usize, i: usize| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                [r * phi.cos(), r * phi.sin(), z]
            };
            if k.is_multiple_of(2) {
                let half = k / 2;
                let pts: Vec<[f64; 3]> = (0..half).map(|i| spiral(half, i)).collect();
                for p in &pts {
                    directions.extend_from_slice(p);
                }
                for p in &pts {
                    directions.extend_from_slice(&[-p[0], -p[1], -p[2]]);
                }
            } else {
                for i in 0..k {
                    directions.extend_from_slice(&spiral(k, i));
                }
            }
            for d in directions.chunks_mut(3) {
                let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                d.iter_mut().for_each(|v| *v /= norm);
            }
        }
        let weight = sphere_area(dim) / k as f64;
        Ok(Self {
            dim,
            directions,
            weights: vec![weight; k],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn direction(&self, j: usize) -> &[f64] {
        &self.directions[j * self.dim..(j + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Surface measure of `S^{n-1}`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension checked by callers"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn two_point_axis() {
        let g = VelocityGrid::new(1, 1.0, 2).unwrap();
        assert_eq!(g.axis(), &[-0.5, 0.5]);
        assert_eq!(g.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn weight_sum_is_box_volume() {
        let g = VelocityGrid::new(2, 4.0, 4).unwrap();
        assert_eq!(g.len(), 16);
        assert!(g.weights().iter().all(|&w| w == 4.0));
        assert_eq!(g.weights().iter().sum::<f64>(), 64.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            VelocityGrid::new(0, 1.0, 4),
            Err(Error::InvalidDimension(0))
        ));
        assert!(matches!(
            VelocityGrid::new(4, 1.0, 4),
            Err(Error::InvalidDimension(4))
        ));
        assert!(VelocityGrid::new(1, 0.0, 4).is_err());
        assert!(VelocityGrid::new(1, -1.0, 4).is_err());
        assert!(VelocityGrid::new(1, 1.0, 1).is_err());
    }

    #[test]
    fn nodes_are_mirror_symmetric() {
        for (n, m) in [(1, 7), (2, 6), (3, 5)] {
            let g = VelocityGrid::new(n, 3.0, m).unwrap();
            for i in 0..g.len() {
                let j = g.mirror(i);
                for a in 0..n {
                    assert_eq!(g.node(i)[a], -g.node(j)[a]);
                }
            }
        }
    }

    #[test]
    fn unit_gaussian_integral() {
        let g = VelocityGrid::new(1, 8.0, 256).unwrap();
        let v = g.sample(|z| (-z[0] * z[0] / 2.0).exp());
        assert_abs_diff_eq!(
            g.integrate(&v).unwrap(),
            (2.0 * PI).sqrt(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn constant_integrates_to_measure() {
        let g = VelocityGrid::new(1, 1.0, 10).unwrap();
        assert_abs_diff_eq!(g.integrate(&[1.0; 10]).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn second_moment_gaussian() {
        let g = VelocityGrid::new(1, 8.0, 512).unwrap();
        let v = g.sample(|z| z[0] * z[0] * (-z[0] * z[0]).exp());
        assert_abs_diff_eq!(
            g.integrate(&v).unwrap(),
            0.5 * PI.sqrt(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = VelocityGrid::new(1, 8.0, 64).unwrap();
        let v = g.sample(|z| z[0] * (-z[0] * z[0]).exp());
        assert_eq!(g.integrate(&v).unwrap(), 0.0);
    }

    #[test]
    fn integrate_errors() {
        let g = VelocityGrid::new(1, 1.0, 4).unwrap();
        assert!(matches!(
            g.integrate(&[1.0; 3]),
            Err(Error::LengthMismatch { expected: 4, got: 3 })
        ));
        assert!(matches!(
            g.integrate(&[1.0, f64::NAN, 1.0, 1.0]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        // Polynomial times a Gaussian; spacing halves at fixed L = 8.
        let exact = 0.5 * PI.sqrt();
        let err = |m| {
            let g = VelocityGrid::new(1, 8.0, m).unwrap();
            let v = g.sample(|z| z[0] * z[0] * (-z[0] * z[0]).exp());
            (g.integrate(&v).unwrap() - exact).abs()
        };
        let coarse = err(8);
        let fine = err(16);
        assert!(coarse > 1e-6, "coarse error {coarse} should be visible");
        assert!(coarse / fine >= 4.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn interpolation_reproduces_nodes_and_vanishes_outside() {
        let g = VelocityGrid::new(2, 2.0, 4).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| i as f64 + 1.0).collect();
        for i in 0..g.len() {
            assert_abs_diff_eq!(g.interpolate(&v, g.node(i)), v[i], epsilon = 1e-12);
        }
        assert_eq!(g.interpolate(&v, &[2.5, 0.0]), 0.0);
        assert_eq!(g.interpolate(&v, &[0.0, -2.01]), 0.0);
        // Linear along an axis: affine data is reproduced between interior nodes.
        let affine = g.sample(|z| 1.0 + 2.0 * z[0] - z[1]);
        assert_abs_diff_eq!(
            g.interpolate(&affine, &[0.3, -0.7]),
            1.0 + 0.6 + 0.7,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics_away_from_the_boundary() {
        let g = VelocityGrid::new(2, 4.0, 16).unwrap();
        let poly = |z: &[f64]| 0.5 - z[0] + 0.3 * z[0] * z[0] * z[1] + 0.1 * z[1].powi(3);
        let v = g.sample(poly);
        for p in [[0.1, -0.2], [1.3, 0.77], [-2.1, 1.9]] {
            assert_abs_diff_eq!(g.interpolate_with(&v, &p, Interpolation::Cubic), poly(&p), epsilon = 1e-10);
        }
        for i in 0..g.len() {
            assert_abs_diff_eq!(g.interpolate_with(&v, g.node(i), Interpolation::Cubic), v[i], epsilon = 1e-12);
        }
        assert_eq!(g.interpolate_with(&v, &[4.2, 0.0], Interpolation::Cubic), 0.0);
        assert_eq!("cubic".parse::<Interpolation>().unwrap(), Interpolation::Cubic);
        assert!("spline".parse::<Interpolation>().is_err());
    }

    #[test]
    fn circle_rule() {
        let s = SphereRule::new(2, 4).unwrap();
        let expected = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (j, e) in expected.iter().enumerate() {
            assert_abs_diff_eq!(s.direction(j)[0], e[0], epsilon = 1e-15);
            assert_abs_diff_eq!(s.direction(j)[1], e[1], epsilon = 1e-15);
            assert_abs_diff_eq!(s.weights()[j], PI / 2.0, epsilon = 1e-15);
        }
        let s = SphereRule::new(2, 32).unwrap();
        assert_abs_diff_eq!(s.total_weight(), 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn sphere_rule_3d() {
        for k in [64, 65] {
            let s = SphereRule::new(3, k).unwrap();
            assert_abs_diff_eq!(s.total_weight(), 4.0 * PI, epsilon = 1e-12);
            let mut mean = [0.0; 3];
            for j in 0..s.len() {
                let d = s.direction(j);
                let norm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
                for a in 0..3 {
                    mean[a] += d[a] / s.len() as f64;
                }
            }
            let mean_norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(mean_norm < 0.05, "k={k}: mean direction norm {mean_norm}");
        }
    }

    #[test]
    fn sphere_rule_rejects_line() {
        assert!(SphereRule::new(1, 8).is_err());
        assert!(SphereRule::new(2, 3).is_err());
    }

    #[test]
    fn spatial_domain_volumes() {
        let d = SpatialDomain::uniform(4, 2.0).unwrap();
        assert_eq!(d.cells(), 4);
        assert_abs_diff_eq!(d.total_volume(), 2.0, epsilon = 1e-15);
        assert!(SpatialDomain::homogeneous(0.0).is_err());
        assert!(SpatialDomain::from_cells(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn integrate_is_linear(
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            seed in proptest::collection::vec(-1.0f64..1.0, 27),
        ) {
            let g = VelocityGrid::new(3, 1.5, 3).unwrap();
            let u: Vec<f64> = seed.iter().map(|x| x.sin()).collect();
            let v: Vec<f64> = seed.iter().map(|x| x * x - 0.3).collect();
            let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let lhs = g.integrate(&combo).unwrap();
            let rhs = a * g.integrate(&u).unwrap() + b * g.integrate(&v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn odd_moments_of_even_fields_vanish(
            c in proptest::collection::vec(0.0f64..2.0, 3),
        ) {
            let g = VelocityGrid::new(2, 3.0, 8).unwrap();
            let even = g.sample(|z| c[0] + c[1] * z[0] * z[0] + c[2] * (z[0] * z[1]).cos());
            let odd_moment = g.integrate_with(&even, |i| g.node(i)[0]);
            prop_assert!(odd_moment.abs() < 1e-12);
        }
    }
}
