//! Collision physics at desk scale.
//!
//! `q_evaluate` is a brute-force discrete-velocity quadrature of the
//! collision operator with kernel `B ≡ 1`. Time evolution uses a BGK
//! relaxation `∂f/∂t = (M_loc - f)/τ` instead of the full operator; it has the
//! same equilibria and the same entropy monotonicity. Spatial transport is not
//! modelled, so each cell relaxes independently.

use std::io::Write;

use crate::dist::{local_maxwellian, profile_moments, DistributionField, MaxwellianParams};
use crate::error::{positive, Error, Result};
use crate::format::sig12;
use crate::functionals::{distance, functional_f};
use crate::grid::{Interpolation, SphereRule, VelocityGrid};
use crate::maxent::{self, DualOptions, MomentTargets};
use crate::par;

/// Tolerance on `|σ| = 1`.
pub const UNIT_TOL: f64 = 1e-12;

/// Default node-count limit for `q_evaluate`.
pub const DEFAULT_MAX_NODES: usize = 1024;

/// A binary collision: pre-collision velocities, the angle σ, and the
/// post-collision velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionPair {
    pub zeta: Vec<f64>,
    pub zeta_star: Vec<f64>,
    pub sigma: Vec<f64>,
    pub zeta_prime: Vec<f64>,
    pub zeta_star_prime: Vec<f64>,
}

impl CollisionPair {
    pub fn new(zeta: &[f64], zeta_star: &[f64], sigma: &[f64]) -> Result<Self> {
        let (zeta_prime, zeta_star_prime) = sigma_transform(zeta, zeta_star, sigma)?;
        Ok(Self {
            zeta: zeta.to_vec(),
            zeta_star: zeta_star.to_vec(),
            sigma: sigma.to_vec(),
            zeta_prime,
            zeta_star_prime,
        })
    }
}

/// `ζ' = (ζ★+ζ)/2 + σ|ζ★-ζ|/2`, `ζ'★ = (ζ★+ζ)/2 - σ|ζ★-ζ|/2`.
pub fn sigma_transform(zeta: &[f64], zeta_star: &[f64], sigma: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = zeta.len();
    if zeta_star.len() != n || sigma.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if zeta_star.len() != n { zeta_star.len() } else { sigma.len() },
        });
    }
    let norm = sigma.iter().map(|s| s * s).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be a unit vector (|sigma| = {norm})"),
        });
    }
    let mut prime = vec![0.0; n];
    let mut star_prime = vec![0.0; n];
    transform_into(zeta, zeta_star, sigma, &mut prime, &mut star_prime);
    Ok((prime, star_prime))
}

#[inline]
fn transform_into(zeta: &[f64], zeta_star: &[f64], sigma: &[f64], prime: &mut [f64], star_prime: &mut [f64]) {
    let half_rel = 0.5
        * zeta
            .iter()
            .zip(zeta_star)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();
    for a in 0..zeta.len() {
        let center = 0.5 * (zeta_star[a] + zeta[a]);
        prime[a] = center + sigma[a] * half_rel;
        star_prime[a] = center - sigma[a] * half_rel;
    }
}

/// Settings for [`q_evaluate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QOptions {
    /// Grids with more nodes are rejected; the cost is `O(N² k)`.
    pub max_nodes: usize,
    /// How `f` is evaluated at post-collision velocities.
    pub interpolation: Interpolation,
}

impl Default for QOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
            interpolation: Interpolation::Cubic,
        }
    }
}

/// `Q(f,f)` at every node with `B ≡ 1` and default [`QOptions`].
pub fn q_evaluate(f: &[f64], grid: &VelocityGrid, sphere: &SphereRule) -> Result<Vec<f64>> {
    q_evaluate_with(f, grid, sphere, QOptions::default())
}

/// Gain minus loss at each node. The gain needs `f` off-grid; it is
/// interpolated, clipped at zero, and zero outside the box.
pub fn q_evaluate_with(f: &[f64], grid: &VelocityGrid, sphere: &SphereRule, opts: QOptions) -> Result<Vec<f64>> {
    let scheme = opts.interpolation;
    let n = grid.dim();
    if n == 1 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "the collision operator needs n >= 2".into(),
        });
    }
    if sphere.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sphere.dim(),
        });
    }
    if f.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: f.len(),
        });
    }
    if grid.len() > opts.max_nodes {
        return Err(Error::CostExceeded {
            nodes: grid.len(),
            limit: opts.max_nodes,
        });
    }
    let w = grid.weights();
    let density = grid.integrate_unchecked(f);
    let area = sphere.total_weight();
    let sw = sphere.weights();
    Ok(par::map_indexed(grid.len(), |i| {
        let zeta = grid.node(i);
        let mut prime = [0.0; 3];
        let mut star_prime = [0.0; 3];
        let mut gain = 0.0;
        for j in 0..grid.len() {
            let zs = grid.node(j);
            let mut inner = 0.0;
            for s in 0..sphere.len() {
                transform_into(zeta, zs, sphere.direction(s), &mut prime[..n], &mut star_prime[..n]);
                let a = grid.interpolate_with(f, &prime[..n], scheme).max(0.0);
                if a == 0.0 {
                    continue;
                }
                inner += sw[s] * a * grid.interpolate_with(f, &star_prime[..n], scheme).max(0.0);
            }
            gain += w[j] * inner;
        }
        gain - f[i] * area * density
    }))
}

/// `∫φ Q dζ` for `φ ∈ {1, ζ_k, |ζ|²}` and `‖Q‖₁ = ∫|Q| dζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResiduals {
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
    pub l1: f64,
    pub max_norm: f64,
}

impl InvariantResiduals {
    /// Every residual divided by `‖Q‖₁`, in the order mass, momentum, energy.
    pub fn relative(&self) -> Vec<f64> {
        let mut out = vec![self.mass / self.l1];
        out.extend(self.momentum.iter().map(|m| m / self.l1));
        out.push(self.energy / self.l1);
        out
    }
}

pub fn invariant_residuals(q: &[f64], grid: &VelocityGrid) -> InvariantResiduals {
    let abs: Vec<f64> = q.iter().map(|v| v.abs()).collect();
    InvariantResiduals {
        mass: grid.integrate_unchecked(q),
        momentum: (0..grid.dim())
            .map(|a| grid.integrate_with(q, |i| grid.node(i)[a]))
            .collect(),
        energy: grid.integrate_with(q, |i| grid.speed_sq(i)),
        l1: grid.integrate_unchecked(&abs),
        max_norm: abs.iter().fold(0.0, |a, &b| a.max(b)),
    }
}

/// Maxwellian on the grid whose discrete moments equal `(rho, momentum,
/// energy)` to round-off. Falls back to the sampled continuous Maxwellian if
/// the moment correction does not converge.
fn matched_local_maxwellian(
    grid: &VelocityGrid,
    rho: f64,
    momentum: &[f64],
    energy: f64,
    temperature: f64,
) -> Result<Vec<f64>> {
    let u: Vec<f64> = momentum.iter().map(|m| m / rho).collect();
    let targets = MomentTargets {
        rho,
        momentum: momentum.to_vec(),
        energy,
    };
    let theta0 = maxent::theta_from_maxwellian(rho, &u, temperature);
    match maxent::solve(grid, 1.0, &targets, theta0, DualOptions { tol: 1e-14, max_iter: 50 }) {
        Ok(sol) => Ok(sol.profile),
        Err(Error::NotConverged { .. }) => local_maxwellian(rho, &u, temperature, grid),
        Err(e) => Err(e),
    }
}

/// One explicit Euler step of BGK relaxation in every cell:
/// `f + (dt/τ)(M_loc - f)`.
///
/// `M_loc` carries the cell's own grid moments, so mass, momentum and energy
/// of each cell are conserved to round-off. Cells with zero density or
/// non-positive temperature are left unchanged.
pub fn bgk_step(f: &DistributionField, tau: f64, dt: f64) -> Result<DistributionField> {
    positive("tau", tau)?;
    positive("dt", dt)?;
    if dt > tau {
        return Err(Error::UnstableStep { dt, tau });
    }
    let grid = f.grid();
    let n = grid.dim();
    let ratio = dt / tau;
    let cells = par::map_indexed(f.domain().cells(), |c| -> Result<Vec<f64>> {
        let profile = f.cell(c);
        let (rho, mom, energy) = profile_moments(grid, profile);
        if !(rho > 0.0) {
            return Ok(profile.to_vec());
        }
        let u2: f64 = mom.iter().map(|m| (m / rho).powi(2)).sum();
        let temperature = (2.0 * energy / rho - u2) / n as f64;
        if !(temperature > 0.0) {
            return Ok(profile.to_vec());
        }
        let eq = matched_local_maxwellian(grid, rho, &mom, energy, temperature)?;
        Ok(profile
            .iter()
            .zip(&eq)
            .map(|(fv, mv)| fv + ratio * (mv - fv))
            .collect())
    });
    let mut values = Vec::with_capacity(f.values().len());
    for cell in cells {
        values.extend(cell?);
    }
    // Convex combination of non-negative arrays: stays non-negative.
    Ok(DistributionField::from_parts_unchecked(
        grid.clone(),
        f.domain().clone(),
        values,
    ))
}

/// Observables recorded along a relaxation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelaxationTrace {
    pub times: Vec<f64>,
    pub entropy: Vec<f64>,
    pub functional: Vec<f64>,
    pub dist: Vec<f64>,
    pub rho: Vec<f64>,
    pub energy: Vec<f64>,
}

impl RelaxationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn record(&mut self, t: f64, f: &DistributionField, m: &MaxwellianParams) -> Result<()> {
        let s = crate::dist::moments(f);
        self.times.push(t);
        self.entropy.push(s.entropy);
        self.functional.push(functional_f(f, m.temperature)?);
        self.dist.push(distance(m, f, m.temperature)?.dist);
        self.rho.push(s.rho_total);
        self.energy.push(s.energy_total);
        Ok(())
    }

    /// CSV with header `t,S,F,dist,rho,E`, values at 12 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "S", "F", "dist", "rho", "E"])?;
        for k in 0..self.len() {
            w.write_record([
                sig12(self.times[k]),
                sig12(self.entropy[k]),
                sig12(self.functional[k]),
                sig12(self.dist[k]),
                sig12(self.rho[k]),
                sig12(self.energy[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run `steps` BGK steps from `f0`, recording `steps + 1` rows including the
/// initial state. `dist` is measured against `m`, which must share the total
/// density of `f0`.
pub fn relax(
    f0: &DistributionField,
    m: &MaxwellianParams,
    tau: f64,
    dt: f64,
    steps: usize,
) -> Result<(RelaxationTrace, DistributionField)> {
    positive("tau", tau)?;
    positive("dt", dt)?;
    if dt > tau {
        return Err(Error::UnstableStep { dt, tau });
    }
    let mut trace = RelaxationTrace::default();
    let mut f = f0.clone();
    trace.record(0.0, &f, m)?;
    for k in 1..=steps {
        f = bgk_step(&f, tau, dt)?;
        trace.record(k as f64 * dt, &f, m)?;
    }
    Ok((trace, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{maxwellian_eval, moments};
    use crate::grid::SpatialDomain;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn head_on_collision() {
        let (p, ps) = sigma_transform(&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(p, vec![0.0, 1.0]);
        assert_eq!(ps, vec![0.0, -1.0]);
    }

    #[test]
    fn degenerate_collisions() {
        let z = [0.3, -1.2, 2.0];
        let (p, ps) = sigma_transform(&z, &z, &[0.0, 0.6, 0.8]).unwrap();
        assert_eq!(p, z.to_vec());
        assert_eq!(ps, z.to_vec());

        let zs = [1.0, 1.0, -1.0];
        let rel: Vec<f64> = z.iter().zip(&zs).map(|(a, b)| a - b).collect();
        let norm = rel.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sigma: Vec<f64> = rel.iter().map(|v| v / norm).collect();
        let (p, ps) = sigma_transform(&z, &zs, &sigma).unwrap();
        for a in 0..3 {
            assert_abs_diff_eq!(p[a], z[a], epsilon = 1e-14);
            assert_abs_diff_eq!(ps[a], zs[a], epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_non_unit_sigma() {
        assert!(sigma_transform(&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(sigma_transform(&[0.0, 0.0], &[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn random_collisions_conserve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let n = rng.random_range(2..=3);
            let z: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let zs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            s.iter_mut().for_each(|v| *v /= norm);
            let c = CollisionPair::new(&z, &zs, &s).unwrap();
            let e0: f64 = z.iter().chain(&zs).map(|v| v * v).sum();
            let e1: f64 = c.zeta_prime.iter().chain(&c.zeta_star_prime).map(|v| v * v).sum();
            for a in 0..n {
                let before = z[a] + zs[a];
                let after = c.zeta_prime[a] + c.zeta_star_prime[a];
                assert!((before - after).abs() <= 4.0 * f64::EPSILON * before.abs().max(1.0));
            }
            assert!((e0 - e1).abs() < 1e-12 * e0.max(1.0));
        }
    }

    #[test]
    fn q_of_zero_is_zero() {
        let g = VelocityGrid::new(2, 4.0, 6).unwrap();
        let s = SphereRule::new(2, 8).unwrap();
        let q = q_evaluate(&vec![0.0; g.len()], &g, &s).unwrap();
        assert!(q.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn q_rejects_bad_inputs() {
        let g1 = VelocityGrid::new(1, 4.0, 6).unwrap();
        let s2 = SphereRule::new(2, 8).unwrap();
        assert!(q_evaluate(&[0.0; 6], &g1, &s2).is_err());
        let g = VelocityGrid::new(2, 4.0, 40).unwrap();
        assert!(matches!(
            q_evaluate(&vec![0.0; g.len()], &g, &s2),
            Err(Error::CostExceeded { nodes: 1600, .. })
        ));
        let s3 = SphereRule::new(3, 8).unwrap();
        let g2 = VelocityGrid::new(2, 4.0, 6).unwrap();
        assert!(q_evaluate(&vec![0.0; 36], &g2, &s3).is_err());
    }

    #[test]
    fn q_preserves_evenness() {
        let g = VelocityGrid::new(2, 4.0, 10).unwrap();
        let s = SphereRule::new(2, 12).unwrap();
        let f = g.sample(|z| (-(z[0] * z[0] + 2.0 * z[1] * z[1]) / 2.0).exp() * (1.0 + 0.3 * z[0] * z[0]));
        let q = q_evaluate(&f, &g, &s).unwrap();
        for i in 0..g.len() {
            assert!((q[i] - q[g.mirror(i)]).abs() < 1e-12 * q[i].abs().max(1e-3));
        }
    }

    #[test]
    fn q_at_maxwellian_shrinks_with_refinement() {
        let maxnorm = |m: usize, k: usize| {
            let g = VelocityGrid::new(2, 5.0, m).unwrap();
            let s = SphereRule::new(2, k).unwrap();
            let f = local_maxwellian(1.0, &[0.0, 0.0], 1.0, &g).unwrap();
            invariant_residuals(&q_evaluate(&f, &g, &s).unwrap(), &g).max_norm
        };
        let coarse = maxnorm(12, 16);
        let fine = maxnorm(20, 24);
        assert!(fine < coarse, "{fine} !< {coarse}");
    }

    #[test]
    fn cubic_gain_is_closer_to_stationary_than_multilinear() {
        let g = VelocityGrid::new(2, 4.8, 16).unwrap();
        let s = SphereRule::new(2, 32).unwrap();
        let f = local_maxwellian(1.0, &[0.0, 0.0], 1.0, &g).unwrap();
        let with = |interpolation| {
            let opts = QOptions {
                interpolation,
                ..QOptions::default()
            };
            invariant_residuals(&q_evaluate_with(&f, &g, &s, opts).unwrap(), &g).max_norm
        };
        let linear = with(Interpolation::Multilinear);
        let cubic = with(Interpolation::Cubic);
        assert!(cubic < 0.25 * linear, "cubic {cubic}, multilinear {linear}");
    }

    #[test]
    fn maxwellian_is_bgk_fixed_point() {
        let g = VelocityGrid::new(2, 8.0, 32).unwrap();
        let d = SpatialDomain::uniform(2, 1.0).unwrap();
        let p = MaxwellianParams::at_rest(1.0, 1.0, 1.0, 2).unwrap();
        let f = maxwellian_eval(&p, &g, &d).unwrap();
        let next = bgk_step(&f, 1.0, 0.5).unwrap();
        assert!(next.max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn bgk_step_errors_and_empty_cells() {
        let g = VelocityGrid::new(1, 4.0, 16).unwrap();
        let d = SpatialDomain::uniform(2, 1.0).unwrap();
        let mut vals = vec![0.0; 32];
        vals[16..].copy_from_slice(&local_maxwellian(1.0, &[0.5], 0.8, &g).unwrap());
        let f = DistributionField::new(g, d, vals).unwrap();
        assert!(matches!(bgk_step(&f, 1.0, 1.5), Err(Error::UnstableStep { .. })));
        assert!(bgk_step(&f, 0.0, 0.1).is_err());
        let next = bgk_step(&f, 1.0, 0.5).unwrap();
        assert!(next.cell(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bgk_conserves_cell_moments() {
        let g = VelocityGrid::new(2, 9.0, 40).unwrap();
        let d = SpatialDomain::uniform(3, 1.5).unwrap();
        let mut vals = Vec::new();
        for c in 0..3 {
            let a = local_maxwellian(0.6, &[0.8, 0.1 * c as f64], 0.5, &g).unwrap();
            let b = local_maxwellian(0.4 + 0.2 * c as f64, &[-0.7, 0.0], 0.9, &g).unwrap();
            vals.extend(a.iter().zip(&b).map(|(x, y)| x + y));
        }
        let f = DistributionField::new(g, d, vals).unwrap();
        let before = moments(&f);
        let next = bgk_step(&f, 1.0, 0.5).unwrap();
        let after = moments(&next);
        assert!((before.rho_total - after.rho_total).abs() < 1e-10 * before.rho_total);
        assert!((before.energy_total - after.energy_total).abs() < 1e-10 * before.energy_total);
        for a in 0..2 {
            assert!((before.momentum[a] - after.momentum[a]).abs() < 1e-10);
        }
        assert!(after.entropy > before.entropy);
    }

    #[test]
    fn relax_from_equilibrium_is_flat() {
        let g = VelocityGrid::new(2, 8.0, 32).unwrap();
        let d = SpatialDomain::homogeneous(1.0).unwrap();
        let p = MaxwellianParams::at_rest(1.0, 1.0, 1.0, 2).unwrap();
        let f = maxwellian_eval(&p, &g, &d).unwrap();
        let (trace, _) = relax(&f, &p, 1.0, 0.5, 6).unwrap();
        assert_eq!(trace.len(), 7);
        assert!(trace.dist.iter().all(|d| d.abs() < 1e-8));
    }

    #[test]
    fn trace_csv_layout() {
        let trace = RelaxationTrace {
            times: vec![0.0, 0.5],
            entropy: vec![1.0, 1.25],
            functional: vec![0.1, 0.2],
            dist: vec![0.3, 0.2],
            rho: vec![1.0, 1.0],
            energy: vec![2.0, 2.0],
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,S,F,dist,rho,E\n0,1,0.1,0.3,1,2\n0.5,1.25,0.2,0.2,1,2\n"
        );
    }
}
