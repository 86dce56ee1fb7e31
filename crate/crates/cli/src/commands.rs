//! One function per subcommand. Each returns a [`Record`] plus, for
//! `project` and `relax`, the artifact that `--out` writes.

use kindist::collision::DEFAULT_MAX_NODES;
use kindist::functionals::{distance_bregman_with_tolerance, distance_with_tolerance, DENSITY_REL_TOL};
use kindist::{
    functional_f, invariant_residuals, maxwellian_eval,
    moments, projection_bound, q_evaluate_with, relax, Interpolation, QOptions, DistanceMethod, DistributionField, InvariantResiduals,
    SpatialDomain, SphereRule, VelocityGrid,
};

use crate::config::Config;
use crate::error::CliError;
use crate::record::{Record, Value};
use crate::scenario::{moment_class, Scenario, DEFAULT_POINTS};

pub enum Artifact {
    Field(DistributionField),
    Csv(Vec<u8>),
}

pub struct Outcome {
    pub record: Record,
    pub artifact: Option<Artifact>,
}

impl From<Record> for Outcome {
    fn from(record: Record) -> Self {
        Self { record, artifact: None }
    }
}

pub fn cmd_moments(cfg: &Config) -> Result<Outcome, CliError> {
    let s = Scenario::load(cfg)?;
    let m = moments(&s.field);
    let mut r = Record::new();
    r.num("rho_total", m.rho_total)
        .push("U", Value::Vec(m.momentum))
        .num("E_total", m.energy_total)
        .num("S", m.entropy)
        .push("mean_u_per_cell", Value::Rows(m.mean_u_per_cell));
    if cfg.contains("reference.T") {
        r.num("F", functional_f(&s.field, s.reference.temperature)?);
    }
    Ok(r.into())
}

pub fn cmd_dist(cfg: &Config, method: DistanceMethod) -> Result<Outcome, CliError> {
    let s = Scenario::load(cfg)?;
    let tol = cfg.f64_or("dist.density_tol", DENSITY_REL_TOL)?;
    let report = match method {
        DistanceMethod::Difference => distance_with_tolerance(&s.reference, &s.field, s.reference.temperature, tol)?,
        DistanceMethod::Bregman => distance_bregman_with_tolerance(&s.reference, &s.field, tol)?,
    };
    let mut r = Record::new();
    r.num("F_M", report.f_m)
        .num("F_f", report.f_f)
        .num("dist", report.dist)
        .num("rho_M", report.rho_m)
        .num("rho_f", report.rho_f)
        .push("method", Value::Text(report.method.to_string()));
    Ok(r.into())
}

pub fn cmd_project(cfg: &Config, oracle: bool) -> Result<Outcome, CliError> {
    let (class, t_ref) = moment_class(cfg)?;
    let p = kindist::project(&class, t_ref)?;
    let bound = projection_bound(t_ref, p.t1, class.rho, &class.momentum, class.dim())?;
    let mut r = Record::new();
    r.num("rho", class.rho)
        .num("E1", class.energy)
        .push("U", Value::Vec(class.momentum.clone()))
        .num("T_ref", t_ref)
        .num("T1", p.t1)
        .push("u", Value::Vec(p.minimizer.u.clone()))
        .num("dist_min", p.dist_min)
        .num("bound_t1_term", bound.t1_term)
        .num("bound_t_term", bound.t_term)
        .num("nu", p.multipliers.nu)
        .push("gamma", Value::Vec(p.multipliers.gamma.clone()))
        .num("mu", p.multipliers.mu)
        .num("C", p.multipliers.c)
        .num("C1", p.multipliers.c1);

    let grid = match cfg.f64("grid.L")? {
        Some(l) => VelocityGrid::new(class.dim(), l, cfg.usize("grid.m")?.unwrap_or(DEFAULT_POINTS))?,
        None => class.resolving_grid(cfg.usize("grid.m")?.unwrap_or(DEFAULT_POINTS))?,
    };
    if oracle {
        let o = kindist::project_oracle(&class, t_ref, &grid)?;
        let gap = grid
            .sample(|z| p.minimizer.eval(z))
            .iter()
            .zip(&o.profile)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        r.num("oracle_gap", gap)
            .push("oracle_iterations", Value::Int(o.iterations as u64))
            .num("oracle_residual", o.residual)
            .num("oracle_nu", o.multipliers.nu)
            .push("oracle_gamma", Value::Vec(o.multipliers.gamma));
    }
    let cells = cfg.usize("domain.cells")?.unwrap_or(1);
    let domain = SpatialDomain::uniform(cells, class.volume)?;
    let field = maxwellian_eval(&p.minimizer, &grid, &domain)?;
    Ok(Outcome {
        record: r,
        artifact: Some(Artifact::Field(field)),
    })
}

pub fn cmd_relax(cfg: &Config) -> Result<Outcome, CliError> {
    let s = Scenario::load(cfg)?;
    let tau = cfg.f64_or("relax.tau", 1.0)?;
    let dt = cfg.f64_or("relax.dt", 0.25 * tau)?;
    let steps = cfg.usize("relax.steps")?.unwrap_or(40);
    let (trace, _) = relax(&s.field, &s.reference, tau, dt, steps)?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    let last = trace.len() - 1;
    let mut r = Record::new();
    r.push("rows", Value::Int(trace.len() as u64))
        .num("t_final", trace.times[last])
        .num("S_initial", trace.entropy[0])
        .num("S_final", trace.entropy[last])
        .num("dist_initial", trace.dist[0])
        .num("dist_final", trace.dist[last])
        .num("rho_final", trace.rho[last])
        .num("E_final", trace.energy[last]);
    Ok(Outcome {
        record: r,
        artifact: Some(Artifact::Csv(csv)),
    })
}

fn residual_values(res: &InvariantResiduals) -> Vec<f64> {
    res.relative().into_iter().map(f64::abs).collect()
}

fn invariant_names(dim: usize) -> Vec<String> {
    let mut names = vec!["mass".to_owned()];
    names.extend((1..=dim).map(|k| format!("momentum_{k}")));
    names.push("energy".into());
    names
}

fn collide_once(field: &DistributionField, k: usize, opts: QOptions) -> Result<InvariantResiduals, CliError> {
    if field.domain().cells() != 1 {
        return Err(CliError::config("collide works on a single spatial cell (domain.cells = 1)"));
    }
    let sphere = SphereRule::new(field.grid().dim(), k)?;
    let q = q_evaluate_with(field.cell(0), field.grid(), &sphere, opts)?;
    Ok(invariant_residuals(&q, field.grid()))
}

pub fn cmd_collide(cfg: &Config) -> Result<Outcome, CliError> {
    let s = Scenario::load(cfg)?;
    let grid = s.field.grid().clone();
    let k = cfg.usize("collide.k")?.unwrap_or(32);
    let interpolation = match cfg.str("collide.interp") {
        Some(name) => name.parse::<Interpolation>()?,
        None => Interpolation::default(),
    };
    let opts = QOptions {
        max_nodes: cfg.usize("collide.max_nodes")?.unwrap_or(DEFAULT_MAX_NODES),
        interpolation,
    };
    let coarse = collide_once(&s.field, k, opts)?;
    let names = invariant_names(grid.dim());
    let coarse_rel = residual_values(&coarse);

    let mut r = Record::new();
    r.push("n", Value::Int(grid.dim() as u64))
        .push("m", Value::Int(grid.points_per_axis() as u64))
        .push("k", Value::Int(k as u64))
        .push("interp", Value::Text(interpolation.as_str().into()))
        .num("q_maxnorm", coarse.max_norm)
        .num("q_l1", coarse.l1);
    for (name, v) in names.iter().zip(&coarse_rel) {
        r.num(format!("residual_{name}"), *v);
    }
    if let Some(tol) = cfg.f64("collide.tol")? {
        r.num("tol", tol).push("q_within_tol", Value::Bool(coarse.max_norm < tol));
    }

    let refine_m = cfg.usize("collide.refine_m")?;
    let refine_k = cfg.usize("collide.refine_k")?;
    if refine_m.is_some() || refine_k.is_some() {
        let fine_m = refine_m.unwrap_or(grid.points_per_axis());
        let fine_k = refine_k.unwrap_or(k);
        let fine_grid = VelocityGrid::new(grid.dim(), grid.extent(), fine_m)?;
        let fine_field = s.resample(&fine_grid)?;
        let fine = collide_once(&fine_field, fine_k, opts)?;
        let fine_rel = residual_values(&fine);
        r.push("refine_m", Value::Int(fine_m as u64))
            .push("refine_k", Value::Int(fine_k as u64))
            .num("fine_q_maxnorm", fine.max_norm);
        let mut ratios = Vec::new();
        for ((name, c), f) in names.iter().zip(&coarse_rel).zip(&fine_rel) {
            r.num(format!("fine_residual_{name}"), *f);
            let ratio = c / f;
            r.num(format!("ratio_{name}"), ratio);
            ratios.push(ratio);
        }
        let q_ratio = coarse.max_norm / fine.max_norm;
        r.num("ratio_q_maxnorm", q_ratio);
        ratios.push(q_ratio);
        r.num("min_ratio", ratios.iter().copied().fold(f64::INFINITY, f64::min));
    }
    Ok(r.into())
}
