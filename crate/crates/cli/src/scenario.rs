//! Turning a [`Config`] into grids, fields, reference Maxwellians and moment
//! classes.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use kindist::{
    moments, sample_class_member, DistributionField, MaxwellianParams, MomentClass, SpatialDomain,
    VelocityGrid,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::CliError;

pub const DEFAULT_POINTS: usize = 64;

/// One Maxwellian component of a generated field.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub rho: f64,
    pub u: Option<Vec<f64>>,
    pub temperature: f64,
}

impl Component {
    fn read(cfg: &Config, prefix: &str, rho_default: Option<f64>) -> Result<Self, CliError> {
        let rho = match cfg.f64(&format!("{prefix}rho"))? {
            Some(r) => r,
            None => rho_default.ok_or_else(|| CliError::config(format!("missing required key `{prefix}rho`")))?,
        };
        Ok(Self {
            rho,
            u: cfg.vec(&format!("{prefix}u"))?,
            temperature: cfg.f64_or(&format!("{prefix}T"), 1.0)?,
        })
    }

    fn params(&self, dim: usize, volume: f64) -> Result<MaxwellianParams, CliError> {
        let u = self.u.clone().unwrap_or_else(|| vec![0.0; dim]);
        if u.len() != dim {
            return Err(CliError::config(format!(
                "drift has {} components but the grid has n={dim}",
                u.len()
            )));
        }
        Ok(MaxwellianParams::new(self.rho, u, self.temperature, volume)?)
    }
}

/// How the input field is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    /// The reference Maxwellian itself.
    Reference,
    Maxwellian(Component),
    /// Sum of two Maxwellians.
    Mixture(Component, Component),
    /// A seeded random member of the moment class of the reference.
    Perturbed { amplitude: f64 },
    File(PathBuf),
}

impl FieldSpec {
    pub fn from_config(cfg: &Config) -> Result<Self, CliError> {
        match cfg.str("field.kind").unwrap_or("reference") {
            "reference" => Ok(Self::Reference),
            "maxwellian" => Ok(Self::Maxwellian(Component::read(cfg, "field.", None)?)),
            "mixture" => Ok(Self::Mixture(
                Component::read(cfg, "field.a_", None)?,
                Component::read(cfg, "field.b_", None)?,
            )),
            "perturbed" => Ok(Self::Perturbed {
                amplitude: cfg.f64_or("field.amplitude", 0.5)?,
            }),
            "file" => {
                let path = PathBuf::from(
                    cfg.str("field.path")
                        .ok_or_else(|| CliError::config("`field.kind = file` needs `field.path`"))?,
                );
                if !path.is_file() {
                    let e = std::io::Error::new(std::io::ErrorKind::NotFound, "field file not found");
                    return Err(CliError::io(&path, e));
                }
                Ok(Self::File(path))
            }
            other => Err(CliError::config(format!(
                "`field.kind`: expected reference, maxwellian, mixture, perturbed or file, got `{other}`"
            ))),
        }
    }

    fn temperatures(&self) -> Vec<f64> {
        match self {
            Self::Maxwellian(c) => vec![c.temperature],
            Self::Mixture(a, b) => vec![a.temperature, b.temperature],
            _ => vec![],
        }
    }

    fn drift_len(&self) -> Option<usize> {
        match self {
            Self::Maxwellian(c) => c.u.as_ref().map(Vec::len),
            Self::Mixture(a, b) => a.u.as_ref().or(b.u.as_ref()).map(Vec::len),
            _ => None,
        }
    }

    /// Sample the field on `grid`. `reference` is needed by the
    /// reference-derived kinds.
    pub fn build(
        &self,
        grid: &VelocityGrid,
        domain: &SpatialDomain,
        reference: Option<&MaxwellianParams>,
        seed: u64,
    ) -> Result<DistributionField, CliError> {
        let volume = domain.total_volume();
        let need_ref = || reference.ok_or_else(|| CliError::config("this field kind needs a reference Maxwellian"));
        match self {
            Self::Reference => Ok(kindist::maxwellian_eval(need_ref()?, grid, domain)?),
            Self::Maxwellian(c) => Ok(kindist::maxwellian_eval(&c.params(grid.dim(), volume)?, grid, domain)?),
            Self::Mixture(a, b) => {
                let pa = a.params(grid.dim(), volume)?;
                let pb = b.params(grid.dim(), volume)?;
                let profile = grid.sample(|z| pa.eval(z) + pb.eval(z));
                Ok(DistributionField::homogeneous(grid.clone(), domain.clone(), &profile)?)
            }
            Self::Perturbed { amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(sample_class_member(need_ref()?, grid, domain, *amplitude, &mut rng)?)
            }
            Self::File(path) => read_field(path, volume),
        }
    }
}

pub fn read_field(path: &PathBuf, volume: f64) -> Result<DistributionField, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    DistributionField::read_text(BufReader::new(file), volume).map_err(|e| match e {
        kindist::Error::Io(io) => CliError::io(path, io),
        other => CliError::Compute(other),
    })
}

pub fn domain(cfg: &Config) -> Result<SpatialDomain, CliError> {
    let cells = cfg.usize("domain.cells")?.unwrap_or(1);
    let volume = cfg.f64_or("domain.V_omega", 1.0)?;
    Ok(SpatialDomain::uniform(cells, volume)?)
}

pub fn seed(cfg: &Config) -> Result<u64, CliError> {
    Ok(cfg.u64("seed")?.unwrap_or(0))
}

/// `L` defaults to `8√T_max` over every temperature in the scenario.
pub fn velocity_grid(cfg: &Config, dim: usize, temperatures: &[f64]) -> Result<VelocityGrid, CliError> {
    let t_max = temperatures.iter().copied().fold(1e-300, f64::max);
    let extent = match cfg.f64("grid.L")? {
        Some(l) => l,
        None if temperatures.is_empty() => 8.0,
        None => 8.0 * t_max.sqrt(),
    };
    let m = cfg.usize("grid.m")?.unwrap_or(DEFAULT_POINTS);
    Ok(VelocityGrid::new(dim, extent, m)?)
}

/// A field plus the reference Maxwellian it is compared against.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: FieldSpec,
    pub field: DistributionField,
    pub reference: MaxwellianParams,
    /// True when the reference density was taken from the field.
    pub rho_from_field: bool,
    pub seed: u64,
}

impl Scenario {
    pub fn load(cfg: &Config) -> Result<Self, CliError> {
        let spec = FieldSpec::from_config(cfg)?;
        let domain = domain(cfg)?;
        let seed = seed(cfg)?;
        let ref_u = cfg.vec("reference.u")?;
        let ref_t = cfg.f64_or("reference.T", 1.0)?;
        let ref_rho = cfg.f64("reference.rho")?;

        let loaded = match &spec {
            FieldSpec::File(path) => Some(read_field(path, domain.total_volume())?),
            _ => None,
        };
        let dim = match &loaded {
            Some(f) => f.grid().dim(),
            None => match cfg.usize("grid.n")? {
                Some(n) => n,
                None => ref_u.as_ref().map(Vec::len).or(spec.drift_len()).unwrap_or(1),
            },
        };
        let reference_at = |rho: f64| -> Result<MaxwellianParams, CliError> {
            Component {
                rho,
                u: ref_u.clone(),
                temperature: ref_t,
            }
            .params(dim, domain.total_volume())
        };

        let needs_reference_first = matches!(spec, FieldSpec::Reference | FieldSpec::Perturbed { .. });
        let (field, reference, rho_from_field) = if needs_reference_first {
            let reference = reference_at(ref_rho.unwrap_or(1.0))?;
            let grid = velocity_grid(cfg, dim, &[ref_t])?;
            (spec.build(&grid, &domain, Some(&reference), seed)?, reference, false)
        } else {
            let field = match loaded {
                Some(f) => f,
                None => {
                    let mut temps = spec.temperatures();
                    temps.push(ref_t);
                    let grid = velocity_grid(cfg, dim, &temps)?;
                    spec.build(&grid, &domain, None, seed)?
                }
            };
            let (rho, from_field) = match ref_rho {
                Some(r) => (r, false),
                None => (moments(&field).rho_total, true),
            };
            (field.clone(), reference_at(rho)?, from_field)
        };
        Ok(Self {
            spec,
            field,
            reference,
            rho_from_field,
            seed,
        })
    }

    /// The same field description sampled on another grid.
    pub fn resample(&self, grid: &VelocityGrid) -> Result<DistributionField, CliError> {
        if let FieldSpec::File(_) = self.spec {
            return Err(CliError::config("a field read from a file cannot be resampled on another grid"));
        }
        self.spec.build(grid, self.field.domain(), Some(&self.reference), self.seed)
    }
}

/// The moment class of `project`, from the `class.*` keys.
pub fn moment_class(cfg: &Config) -> Result<(MomentClass, f64), CliError> {
    let rho = cfg.require_f64("class.rho")?;
    let energy = cfg.require_f64("class.E1")?;
    let declared = cfg.usize("class.n")?;
    let momentum = match (cfg.vec("class.U")?, declared.or(cfg.usize("grid.n")?)) {
        (Some(u), Some(n)) if u.len() != n => {
            return Err(CliError::config(format!("`class.U` has {} components but n={n}", u.len())));
        }
        (Some(u), _) => u,
        (None, Some(n)) => vec![0.0; n],
        (None, None) => return Err(CliError::config("set `class.n` or `class.U`")),
    };
    let volume = match cfg.f64("class.V")? {
        Some(v) => v,
        None => cfg.f64_or("domain.V_omega", 1.0)?,
    };
    let t_ref = match cfg.f64("class.T_ref")? {
        Some(t) => t,
        None => cfg.f64_or("reference.T", 1.0)?,
    };
    Ok((MomentClass::new(rho, energy, momentum, volume)?, t_ref))
}
