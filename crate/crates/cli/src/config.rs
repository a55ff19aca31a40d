//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qpf_core::potential::DualPotential;
use qpf_core::series::TruncationPolicy;
use qpf_core::thermal::{Statistics, SystemParams};
use qpf_core::Error;

use crate::CliError;

const KEYS: &[&str] = &[
    "N",
    "d",
    "L",
    "beta",
    "lambda",
    "mass",
    "hbar",
    "statistics",
    "potential",
    "strength",
    "range",
    "decay_exponent",
    "table",
    "alpha_max",
    "z_radius",
    "coeff_bound",
    "quad_nodes",
    "theta_tol",
    "m_list",
    "momentum_cutoff",
    "matrix_m",
];

#[derive(Debug, Clone)]
pub enum PotentialSpec {
    Zero,
    Gaussian { strength: f64, range: f64 },
    Table(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: SystemParams,
    pub potential: PotentialSpec,
    pub decay_exponent: Option<f64>,
    pub policy: TruncationPolicy,
    pub m_list: Vec<usize>,
    pub momentum_cutoff: usize,
    /// `None` runs the whole range `2..=50`.
    pub matrix_m: Option<usize>,
}

fn parse_lines(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            }
            .into());
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key").into());
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::config(key, "given more than once").into());
        }
    }
    Ok(out)
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::config(key, format!("cannot parse `{v}`: {e}")).into()),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::config(key, "missing required key").into())
    }

    fn list(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        let Some(v) = self.0.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::config(key, format!("cannot parse `{s}`: {e}")).into())
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let f = Fields(parse_lines(text)?);
        let n: usize = f.require("N")?;
        let d: usize = f.require("d")?;
        let side: f64 = f.require("L")?;
        let beta: f64 = f.require("beta")?;
        let statistics: Statistics = f.get("statistics")?.unwrap_or(Statistics::Bose);
        let system = match (f.get::<f64>("lambda")?, f.get::<f64>("mass")?) {
            (Some(_), Some(_)) => {
                return Err(Error::config("mass", "give either `lambda` or `mass`, not both").into())
            }
            (Some(lambda), None) => {
                if f.0.contains_key("hbar") {
                    return Err(Error::config("hbar", "only used together with `mass`").into());
                }
                SystemParams::new(n, d, side, beta, lambda, statistics)?
            }
            (None, Some(mass)) => {
                let hbar = f.get("hbar")?.unwrap_or(1.0);
                SystemParams::from_mass(n, d, side, beta, mass, hbar, statistics)?
            }
            (None, None) => return Err(Error::config("lambda", "give `lambda` or `mass`").into()),
        };

        let kind = f.0.get("potential").map(String::as_str).unwrap_or("zero");
        let potential = match kind {
            "zero" => PotentialSpec::Zero,
            "gaussian" => PotentialSpec::Gaussian {
                strength: f.require("strength")?,
                range: f.require("range")?,
            },
            "table" => {
                let path = base.join(f.require::<String>("table")?);
                if !path.is_file() {
                    return Err(
                        Error::config("table", format!("no such file `{}`", path.display())).into(),
                    );
                }
                PotentialSpec::Table(path)
            }
            other => {
                return Err(Error::config(
                    "potential",
                    format!("expected `zero`, `gaussian` or `table`, got `{other}`"),
                )
                .into())
            }
        };
        for key in ["strength", "range"] {
            if f.0.contains_key(key) && !matches!(potential, PotentialSpec::Gaussian { .. }) {
                return Err(Error::config(key, "only used with `potential = gaussian`").into());
            }
        }
        if f.0.contains_key("table") && !matches!(potential, PotentialSpec::Table(_)) {
            return Err(Error::config("table", "only used with `potential = table`").into());
        }

        let defaults = TruncationPolicy::default();
        let policy = TruncationPolicy {
            alpha_max: f.get("alpha_max")?.unwrap_or(defaults.alpha_max),
            z_radius: f.get("z_radius")?.unwrap_or(defaults.z_radius),
            coeff_bound: f.get("coeff_bound")?.unwrap_or(defaults.coeff_bound),
            quad_nodes: f.get("quad_nodes")?.unwrap_or(defaults.quad_nodes),
            theta_tol: f.get("theta_tol")?.unwrap_or(defaults.theta_tol),
        };
        policy.validate()?;

        let m_list = f.list("m_list")?.unwrap_or_else(|| vec![8, 16, 32]);
        if m_list.is_empty() || m_list.contains(&0) {
            return Err(Error::config("m_list", "slice counts must be positive").into());
        }
        let cfg = RunConfig {
            system,
            potential,
            decay_exponent: f.get("decay_exponent")?,
            policy,
            m_list,
            momentum_cutoff: f.get("momentum_cutoff")?.unwrap_or(12),
            matrix_m: f.get("matrix_m")?,
        };
        cfg.build_potential()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn build_potential(&self) -> Result<DualPotential, CliError> {
        let pot = match &self.potential {
            PotentialSpec::Zero => DualPotential::zero(),
            PotentialSpec::Gaussian { strength, range } => DualPotential::gaussian(*strength, *range)?,
            PotentialSpec::Table(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                DualPotential::parse_table(&text, self.system.dim, self.system.side)?
            }
        };
        Ok(match self.decay_exponent {
            Some(eta) => pot.with_decay_exponent(eta)?,
            None => pot,
        })
    }
}
