//! TOML run configuration.
//!
//! ```toml
//! [domain]
//! kind = "interval"          # or "rectangle" with lx, ly
//! length = 3.141592653589793
//! n_modes = 16
//!
//! [model]
//! n_exp = 1
//! a = 1.0
//!
//! [noise]
//! count = 2                  # f_k = e_k / k^2, or list `directions`
//!
//! [integrator]
//! T = 1.0
//! dt = 1e-3
//! scheme = "exp_euler_ito"
//!
//! [suite]
//! ensemble = 64
//! ```
//!
//! Only `domain.n_modes`, `integrator.T` and `integrator.dt` are required.
//! Unknown keys are rejected. [`RunConfig`] is the fully resolved form, with
//! every default written out; it is what the manifest records and hashes.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{build_basis, default_quad_points, Domain};
use crate::dynamics::ModelParams;
use crate::error::{Result, ShsimError};
use crate::field::SpectralField;
use crate::geometry::{DirectionSpec, ModeTerm, NoiseModel};
use crate::integrator::{Scheme, SimConfig};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: RawDomain,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    noise: RawNoise,
    integrator: RawIntegrator,
    #[serde(default)]
    suite: RawSuite,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    kind: Option<DomainKind>,
    length: Option<f64>,
    lx: Option<f64>,
    ly: Option<f64>,
    n_modes: Option<usize>,
    quad_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DomainKind {
    Interval,
    Rectangle,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n_exp: Option<i64>,
    a: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    count: Option<usize>,
    directions: Option<Vec<DirectionSpec>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    #[serde(rename = "T")]
    t_final: Option<f64>,
    dt: Option<f64>,
    scheme: Option<Scheme>,
    renormalize: Option<bool>,
    seed: Option<u64>,
    record_every: Option<usize>,
    n_galerkin: Option<usize>,
    noise_root_dt: Option<f64>,
    u0: Option<DirectionSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    ensemble: Option<usize>,
    n_list: Option<Vec<usize>>,
    dt_list: Option<Vec<f64>>,
    delta_list: Option<Vec<f64>>,
    epsilon: Option<f64>,
    t1: Option<f64>,
    t2: Option<f64>,
    probe_samples: Option<usize>,
}

/// Resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSection,
    pub model: ModelParams,
    pub noise: NoiseSection,
    pub integrator: IntegratorSection,
    pub suite: SuiteSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSection {
    #[serde(flatten)]
    pub domain: Domain,
    pub n_modes: usize,
    pub quad_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub directions: Vec<DirectionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub renormalize: bool,
    pub seed: u64,
    pub record_every: usize,
    pub n_galerkin: usize,
    pub noise_root_dt: Option<f64>,
    pub u0: DirectionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    pub ensemble: usize,
    pub n_list: Vec<usize>,
    pub dt_list: Vec<f64>,
    pub delta_list: Vec<f64>,
    pub epsilon: f64,
    pub t1: f64,
    pub t2: f64,
    pub probe_samples: usize,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn require<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| ShsimError::config(key, "missing required key"))
}

/// Prefix bare keys from lower layers with their config section.
fn in_section(section: &str, e: ShsimError) -> ShsimError {
    match e {
        ShsimError::Config { key, message } if !key.contains('.') && key != section => ShsimError::Config {
            key: format!("{section}.{key}"),
            message,
        },
        other => other,
    }
}

/// Nearest point of the `dt` grid.
fn snap(t: f64, dt: f64) -> f64 {
    (t / dt).round() * dt
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ShsimError::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    resolve(raw)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let d = raw.domain;
    let n_modes = require(d.n_modes, "domain.n_modes")?;
    let kind = d.kind.unwrap_or(DomainKind::Interval);
    let domain = match kind {
        DomainKind::Interval => {
            if d.lx.is_some() || d.ly.is_some() {
                return Err(ShsimError::config("domain.lx", "only rectangles take lx and ly"));
            }
            Domain::Interval {
                length: d.length.unwrap_or(PI),
            }
        }
        DomainKind::Rectangle => {
            if d.length.is_some() {
                return Err(ShsimError::config("domain.length", "rectangles take lx and ly"));
            }
            Domain::Rectangle {
                lx: d.lx.unwrap_or(PI),
                ly: d.ly.unwrap_or(PI),
            }
        }
    };
    let n_exp = raw.model.n_exp.unwrap_or(1);
    if n_exp < 1 || n_exp > i64::from(u32::MAX) {
        return Err(ShsimError::config("model.n_exp", "must be an integer >= 1"));
    }
    let model = ModelParams {
        n_exp: n_exp as u32,
        a: raw.model.a.unwrap_or(1.0),
    };
    model.validate()?;
    let quad_points = d.quad_points.unwrap_or_else(|| default_quad_points(n_modes, model.n_exp));
    let dim = n_modes.pow(domain.dimension() as u32);

    let directions = match (raw.noise.count, raw.noise.directions) {
        (Some(_), Some(_)) => {
            return Err(ShsimError::config("noise", "give either `count` or `directions`, not both"))
        }
        (_, Some(dirs)) => dirs,
        (count, None) => {
            let count = count.unwrap_or(2);
            if count == 0 {
                return Err(ShsimError::config("noise.count", "must be at least 1"));
            }
            (1..=count)
                .map(|k| DirectionSpec::Modes {
                    modes: vec![ModeTerm {
                        mode: k,
                        amplitude: 1.0 / (k * k) as f64,
                    }],
                })
                .collect()
        }
    };

    let it = raw.integrator;
    let t_final = require(it.t_final, "integrator.T")?;
    let dt = require(it.dt, "integrator.dt")?;
    if !(dt > 0.0) {
        return Err(ShsimError::config("integrator.dt", "must be positive"));
    }
    if !(t_final > 0.0) {
        return Err(ShsimError::config("integrator.T", "must be positive"));
    }
    if dt > t_final {
        return Err(ShsimError::config("integrator.dt", "must not exceed T"));
    }
    let n_galerkin = it.n_galerkin.unwrap_or(dim);
    let integrator = IntegratorSection {
        t_final,
        dt,
        scheme: it.scheme.unwrap_or(Scheme::ExpEulerIto),
        renormalize: it.renormalize.unwrap_or(true),
        seed: it.seed.unwrap_or(0),
        record_every: it.record_every.unwrap_or(1),
        n_galerkin,
        noise_root_dt: it.noise_root_dt,
        u0: it.u0.unwrap_or(DirectionSpec::Modes {
            modes: vec![ModeTerm { mode: 1, amplitude: 1.0 }],
        }),
    };

    let s = raw.suite;
    let n_list = s.n_list.unwrap_or_else(|| {
        let mut v: Vec<usize> = std::iter::successors(Some(4usize), |n| Some(n * 2))
            .take_while(|&n| n < n_galerkin)
            .collect();
        v.push(n_galerkin);
        v
    });
    let suite = SuiteSection {
        ensemble: s.ensemble.unwrap_or(64),
        n_list,
        dt_list: s.dt_list.unwrap_or_else(|| vec![4.0 * dt, 2.0 * dt, dt]),
        delta_list: s
            .delta_list
            .unwrap_or_else(|| [0.05, 0.1, 0.2, 0.5].iter().map(|f| f * t_final).collect()),
        epsilon: s.epsilon.unwrap_or(0.5),
        t1: s.t1.unwrap_or_else(|| snap(0.75 * t_final, dt)),
        t2: s.t2.unwrap_or_else(|| snap(0.25 * t_final, dt)),
        probe_samples: s.probe_samples.unwrap_or(crate::verification::probes::DEFAULT_SAMPLES),
    };
    if suite.ensemble < 2 {
        return Err(ShsimError::config("suite.ensemble", "must be at least 2"));
    }
    if suite.t2 > suite.t1 {
        return Err(ShsimError::config("suite.t2", "must not exceed suite.t1"));
    }

    let cfg = RunConfig {
        domain: DomainSection {
            domain,
            n_modes,
            quad_points,
        },
        model,
        noise: NoiseSection { directions },
        integrator,
        suite,
    };
    cfg.sim_config()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn sim_config(&self) -> Result<SimConfig> {
        let basis = Arc::new(
            build_basis(self.domain.domain, self.domain.n_modes, self.domain.quad_points)
                .map_err(|e| in_section("domain", e))?,
        );
        let noise = NoiseModel::from_specs(&basis, &self.noise.directions)?;
        let it = &self.integrator;
        let u0 = match &it.u0 {
            DirectionSpec::Modes { modes } => {
                let terms: Vec<_> = modes.iter().map(|t| (t.mode, t.amplitude)).collect();
                SpectralField::from_modes(&basis, &terms)
            }
            DirectionSpec::Coefficients { coefficients } => {
                let mut c = coefficients.clone();
                c.resize(basis.dim().max(c.len()), 0.0);
                SpectralField::from_coeffs(&basis, c)
            }
        }
        .map_err(|e| ShsimError::config("integrator.u0", e.to_string()))?;
        let config = SimConfig {
            basis,
            n_galerkin: it.n_galerkin,
            params: self.model,
            noise,
            u0,
            t_final: it.t_final,
            dt: it.dt,
            scheme: it.scheme,
            renormalize: it.renormalize,
            master_seed: it.seed,
            record_every: it.record_every,
            noise_root_dt: it.noise_root_dt,
        };
        config.validate().map_err(|e| in_section("domain", e))?;
        crate::integrator::initial_condition(&config.u0, config.n_galerkin)
            .map_err(|e| ShsimError::config("integrator.u0", e.to_string()))?;
        Ok(config)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.integrator.seed = seed;
        self
    }

    /// Canonical JSON with object keys sorted.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    /// First 64 bits of SHA-256 over the canonical JSON.
    pub fn hash(&self) -> u64 {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}
