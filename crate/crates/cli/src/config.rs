//! Run configuration: INI-style `key = value` lines grouped in sections.
//! All quantities are SI. Unknown sections and keys are rejected so that a
//! typo cannot silently fall back to a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::Ini;
use msvi_core::model::{BeamPotential, WavePotential};
use msvi_core::{AlgebraVector, BeamParameters, BoundaryRegime, GridSpec, JacobianMode, RetractionKind, SolverSettings};
use nalgebra::Vector3;

use crate::error::{io_err, CliError, Result};

/// Environment variable that overrides `[output] dir`.
pub const OUTPUT_DIR_ENV: &str = "MSVI_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Beam {
        params: BeamParameters,
        gravity: Option<Vector3<f64>>,
    },
    Wave {
        speed: f64,
        potential: WavePotential,
    },
}

impl ModelConfig {
    pub fn is_beam(&self) -> bool {
        matches!(self, ModelConfig::Beam { .. })
    }

    pub fn beam_potential(&self) -> BeamPotential {
        match self {
            ModelConfig::Beam { gravity: Some(g), .. } => BeamPotential::Gravity { accel: *g },
            _ => BeamPotential::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// March in space from two neighbouring curves.
    SpaceEvolution,
    /// March in time from two initial slices.
    TimeEvolution,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Two curves with constant body velocities (space evolution, beam).
    MovingEnds { xi0: AlgebraVector, xi1: AlgebraVector },
    /// Prescribed nodes read from a CSV in trajectory format.
    File { path: PathBuf },
    /// Straight beam at rest whose slice 1 moves with body velocity `xi`
    /// (time evolution, beam).
    BeamVelocity { xi: AlgebraVector },
    /// `y = amplitude sin(2 pi k (s - c t))` (wave).
    TravellingWave { amplitude: f64, wavenumber: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    /// Max-norm of the DCEL residual over every solved equation.
    pub residual: f64,
    /// Relative drift of the conserved momentum map.
    pub drift: f64,
    /// Local and covariant Noether sums, relative to the momentum scale.
    pub noether: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagnostics {
    pub ledger: bool,
    pub energy: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridSpec,
    pub retraction: RetractionKind,
    pub mode: Mode,
    pub regime: BoundaryRegime,
    pub data: DataSource,
    pub solver: SolverSettings,
    pub output_dir: PathBuf,
    pub diagnostics: Diagnostics,
    pub verify: VerifyTolerances,
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "model",
        &["kind", "side", "density", "youngs_modulus", "poisson_ratio", "gravity", "speed", "potential", "potential_parameter"],
    ),
    ("grid", &["duration", "length", "n_time", "n_space", "dt", "ds"]),
    ("method", &["mode", "regime", "retraction"]),
    ("data", &["kind", "xi0", "xi1", "xi", "path", "amplitude", "wavenumber"]),
    ("solver", &["tolerance", "step_tolerance", "max_iterations", "jacobian", "fd_step"]),
    ("output", &["dir", "diagnostics"]),
    ("verify", &["residual", "drift", "noether"]),
];

/// Raw section/key view with typed accessors.
struct Raw {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut sections = BTreeMap::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if props.iter().next().is_some() {
                    return Err(CliError::Config("keys before the first [section]".into()));
                }
                continue;
            };
            let allowed = KEYS
                .iter()
                .find(|(s, _)| *s == name)
                .map(|(_, k)| *k)
                .ok_or_else(|| CliError::Config(format!("unknown section [{name}]")))?;
            let entry: &mut BTreeMap<String, String> = sections.entry(name.to_string()).or_default();
            for (k, v) in props.iter() {
                if !allowed.contains(&k) {
                    return Err(CliError::Config(format!("unknown key {k:?} in [{name}]")));
                }
                if entry.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return Err(CliError::Config(format!("key {k:?} repeated in [{name}]")));
                }
            }
        }
        Ok(Raw { sections })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    fn bad(section: &str, key: &str, reason: impl Into<String>) -> CliError {
        CliError::ConfigValue {
            section: section.into(),
            key: key.into(),
            reason: reason.into(),
        }
    }

    fn required(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| Self::bad(section, key, "missing"))
    }

    fn float(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.get(section, key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Self::bad(section, key, format!("not a finite number: {v:?}")))
            })
            .transpose()
    }

    fn req_float(&self, section: &str, key: &str) -> Result<f64> {
        self.float(section, key)?.ok_or_else(|| Self::bad(section, key, "missing"))
    }

    fn uint(&self, section: &str, key: &str) -> Result<Option<usize>> {
        self.get(section, key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Self::bad(section, key, format!("not a non-negative integer: {v:?}")))
            })
            .transpose()
    }

    fn vector(&self, section: &str, key: &str, dim: usize) -> Result<Vec<f64>> {
        let v = self.required(section, key)?;
        let items: Vec<f64> = v
            .split(',')
            .map(|x| x.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| Self::bad(section, key, format!("not a list of numbers: {v:?}")))?;
        if items.len() != dim {
            return Err(Self::bad(section, key, format!("expected {dim} numbers, found {}", items.len())));
        }
        Ok(items)
    }

    fn choice<T: Copy>(&self, section: &str, key: &str, default: Option<&str>, options: &[(&str, T)]) -> Result<T> {
        let v = match (self.get(section, key), default) {
            (Some(v), _) => v,
            (None, Some(d)) => d,
            (None, None) => return Err(Self::bad(section, key, "missing")),
        };
        options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
            Self::bad(section, key, format!("{v:?} is not one of {}", names.join(", ")))
        })
    }
}

fn core_err<'a>(section: &'a str, key: &'a str) -> impl FnOnce(msvi_core::Error) -> CliError + 'a {
    move |e| Raw::bad(section, key, e.to_string())
}

impl RunConfig {
    /// Reads a config file; relative data paths resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        // Absolute, so the resolved config stays valid when copied into a
        // run directory.
        let base = std::path::absolute(dir).map_err(io_err(dir))?;
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw = Raw::parse(text)?;
        let model = parse_model(&raw)?;
        let grid = parse_grid(&raw)?;
        let retraction = raw.choice(
            "method",
            "retraction",
            Some("cayley"),
            &[("cayley", RetractionKind::Cayley), ("exp", RetractionKind::Exponential)],
        )?;
        let mode = raw.choice(
            "method",
            "mode",
            None,
            &[("space-evolution", Mode::SpaceEvolution), ("time-evolution", Mode::TimeEvolution)],
        )?;
        let regime = match mode {
            Mode::SpaceEvolution => raw.choice(
                "method",
                "regime",
                Some("space-evolution-bvp"),
                &[("space-evolution-bvp", BoundaryRegime::SpaceEvolutionBvp)],
            )?,
            Mode::TimeEvolution => raw.choice(
                "method",
                "regime",
                Some("time-only"),
                &[("time-only", BoundaryRegime::TimeOnly), ("space-time", BoundaryRegime::SpaceTime)],
            )?,
        };
        let data = parse_data(&raw, &model, mode, base)?;
        let solver = parse_solver(&raw)?;
        let output_dir = PathBuf::from(raw.get("output", "dir").unwrap_or("runs/default"));
        let diagnostics = parse_diagnostics(&raw)?;
        let verify = VerifyTolerances {
            residual: raw.float("verify", "residual")?.unwrap_or(1e-7),
            drift: raw.float("verify", "drift")?.unwrap_or(1e-8),
            noether: raw.float("verify", "noether")?.unwrap_or(1e-8),
        };
        for (key, v) in [("residual", verify.residual), ("drift", verify.drift), ("noether", verify.noether)] {
            if v <= 0.0 {
                return Err(Raw::bad("verify", key, "must be positive"));
            }
        }
        Ok(RunConfig {
            model,
            grid,
            retraction,
            mode,
            regime,
            data,
            solver,
            output_dir,
            diagnostics,
            verify,
        })
    }

    /// Output directory after applying the environment override.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }

    /// Every setting with defaults filled in, as sections of key/value
    /// strings. `to_ini` of this map parses back to the same config.
    pub fn resolved(&self) -> BTreeMap<&'static str, BTreeMap<&'static str, String>> {
        let mut out: BTreeMap<&'static str, BTreeMap<&'static str, String>> = BTreeMap::new();
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let model = out.entry("model").or_default();
        match &self.model {
            ModelConfig::Beam { params, gravity } => {
                model.insert("kind", "beam".into());
                model.insert("side", params.side.to_string());
                model.insert("density", params.density.to_string());
                model.insert("youngs_modulus", params.youngs_modulus.to_string());
                model.insert("poisson_ratio", params.poisson_ratio.to_string());
                if let Some(g) = gravity {
                    model.insert("gravity", list(g.as_slice()));
                }
            }
            ModelConfig::Wave { speed, potential } => {
                model.insert("kind", "wave".into());
                model.insert("speed", speed.to_string());
                let (name, p) = match potential {
                    WavePotential::None => ("none", None),
                    WavePotential::KleinGordon { mass } => ("klein-gordon", Some(*mass)),
                    WavePotential::SineGordon { strength } => ("sine-gordon", Some(*strength)),
                };
                model.insert("potential", name.into());
                if let Some(p) = p {
                    model.insert("potential_parameter", p.to_string());
                }
            }
        }
        let grid = out.entry("grid").or_default();
        grid.insert("n_time", self.grid.n_time.to_string());
        grid.insert("n_space", self.grid.n_space.to_string());
        grid.insert("dt", self.grid.dt.to_string());
        grid.insert("ds", self.grid.ds.to_string());
        let method = out.entry("method").or_default();
        method.insert(
            "mode",
            match self.mode {
                Mode::SpaceEvolution => "space-evolution",
                Mode::TimeEvolution => "time-evolution",
            }
            .into(),
        );
        method.insert(
            "regime",
            match self.regime {
                BoundaryRegime::SpaceEvolutionBvp => "space-evolution-bvp",
                BoundaryRegime::TimeOnly => "time-only",
                BoundaryRegime::SpaceTime => "space-time",
                BoundaryRegime::SpaceOnly => "space-only",
            }
            .into(),
        );
        method.insert(
            "retraction",
            match self.retraction {
                RetractionKind::Cayley => "cayley",
                RetractionKind::Exponential => "exp",
            }
            .into(),
        );
        let data = out.entry("data").or_default();
        match &self.data {
            DataSource::MovingEnds { xi0, xi1 } => {
                data.insert("kind", "moving-ends".into());
                data.insert("xi0", list(xi0.as_slice()));
                data.insert("xi1", list(xi1.as_slice()));
            }
            DataSource::File { path } => {
                data.insert("kind", "file".into());
                data.insert("path", path.display().to_string());
            }
            DataSource::BeamVelocity { xi } => {
                data.insert("kind", "beam-velocity".into());
                data.insert("xi", list(xi.as_slice()));
            }
            DataSource::TravellingWave { amplitude, wavenumber } => {
                data.insert("kind", "travelling-wave".into());
                data.insert("amplitude", amplitude.to_string());
                data.insert("wavenumber", wavenumber.to_string());
            }
        }
        let solver = out.entry("solver").or_default();
        solver.insert("tolerance", self.solver.tolerance.to_string());
        solver.insert("step_tolerance", self.solver.step_tolerance.to_string());
        solver.insert("max_iterations", self.solver.max_iterations.to_string());
        solver.insert(
            "jacobian",
            match self.solver.jacobian {
                JacobianMode::ForwardDifference => "forward",
                JacobianMode::CentralDifference => "central",
                JacobianMode::FourthOrder => "fourth-order",
            }
            .into(),
        );
        solver.insert("fd_step", self.solver.fd_step.to_string());
        let output = out.entry("output").or_default();
        output.insert("dir", self.output_dir.display().to_string());
        let mut diag = Vec::new();
        if self.diagnostics.ledger {
            diag.push("ledger");
        }
        if self.diagnostics.energy {
            diag.push("energy");
        }
        output.insert("diagnostics", diag.join(", "));
        let verify = out.entry("verify").or_default();
        verify.insert("residual", self.verify.residual.to_string());
        verify.insert("drift", self.verify.drift.to_string());
        verify.insert("noether", self.verify.noether.to_string());
        out
    }

    /// The resolved settings in config-file syntax.
    pub fn to_ini(&self) -> String {
        let mut ini = Ini::new();
        for (section, keys) in self.resolved() {
            let mut s = ini.with_section(Some(section));
            for (k, v) in keys {
                s.set(k, v);
            }
        }
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini output is UTF-8")
    }
}

fn parse_model(raw: &Raw) -> Result<ModelConfig> {
    let kind = raw.choice("model", "kind", None, &[("beam", true), ("wave", false)])?;
    if kind {
        let params = BeamParameters {
            side: raw.req_float("model", "side")?,
            density: raw.req_float("model", "density")?,
            youngs_modulus: raw.req_float("model", "youngs_modulus")?,
            poisson_ratio: raw.req_float("model", "poisson_ratio")?,
        };
        let gravity = match raw.get("model", "gravity") {
            Some(_) => Some(Vector3::from_vec(raw.vector("model", "gravity", 3)?)),
            None => None,
        };
        Ok(ModelConfig::Beam { params, gravity })
    } else {
        let speed = raw.req_float("model", "speed")?;
        let name = raw.choice(
            "model",
            "potential",
            Some("none"),
            &[("none", 0u8), ("klein-gordon", 1), ("sine-gordon", 2)],
        )?;
        let potential = match name {
            0 => WavePotential::None,
            1 => WavePotential::KleinGordon {
                mass: raw.req_float("model", "potential_parameter")?,
            },
            _ => WavePotential::SineGordon {
                strength: raw.req_float("model", "potential_parameter")?,
            },
        };
        Ok(ModelConfig::Wave { speed, potential })
    }
}

fn parse_grid(raw: &Raw) -> Result<GridSpec> {
    let dt = raw.req_float("grid", "dt")?;
    let ds = raw.req_float("grid", "ds")?;
    let n_time = match (raw.uint("grid", "n_time")?, raw.float("grid", "duration")?) {
        (Some(n), None) => n,
        (None, Some(t)) => GridSpec::step_count("dt", t, dt).map_err(core_err("grid", "duration"))?,
        (Some(_), Some(_)) => return Err(Raw::bad("grid", "n_time", "give either n_time or duration, not both")),
        (None, None) => return Err(Raw::bad("grid", "duration", "missing (or give n_time)")),
    };
    let n_space = match (raw.uint("grid", "n_space")?, raw.float("grid", "length")?) {
        (Some(m), None) => m,
        (None, Some(l)) => GridSpec::step_count("ds", l, ds).map_err(core_err("grid", "length"))?,
        (Some(_), Some(_)) => return Err(Raw::bad("grid", "n_space", "give either n_space or length, not both")),
        (None, None) => return Err(Raw::bad("grid", "length", "missing (or give n_space)")),
    };
    GridSpec::new(n_time, n_space, dt, ds).map_err(core_err("grid", "dt"))
}

fn parse_data(raw: &Raw, model: &ModelConfig, mode: Mode, base: &Path) -> Result<DataSource> {
    let kind = raw.choice(
        "data",
        "kind",
        None,
        &[("moving-ends", 0u8), ("file", 1), ("beam-velocity", 2), ("travelling-wave", 3)],
    )?;
    let data = match kind {
        0 => DataSource::MovingEnds {
            xi0: AlgebraVector::from_vec(raw.vector("data", "xi0", 6)?),
            xi1: AlgebraVector::from_vec(raw.vector("data", "xi1", 6)?),
        },
        1 => DataSource::File {
            path: base.join(raw.required("data", "path")?),
        },
        2 => DataSource::BeamVelocity {
            xi: AlgebraVector::from_vec(raw.vector("data", "xi", 6)?),
        },
        _ => DataSource::TravellingWave {
            amplitude: raw.req_float("data", "amplitude")?,
            wavenumber: raw.req_float("data", "wavenumber")?,
        },
    };
    let ok = match (&data, model.is_beam(), mode) {
        (DataSource::MovingEnds { .. }, true, Mode::SpaceEvolution) => true,
        (DataSource::BeamVelocity { .. }, true, Mode::TimeEvolution) => true,
        (DataSource::TravellingWave { .. }, false, Mode::TimeEvolution) => true,
        (DataSource::File { .. }, true, _) => true,
        (DataSource::File { .. }, false, Mode::TimeEvolution) => true,
        _ => false,
    };
    if !ok {
        return Err(Raw::bad(
            "data",
            "kind",
            format!("{:?} data does not fit this model and mode", raw.required("data", "kind")?),
        ));
    }
    Ok(data)
}

fn parse_solver(raw: &Raw) -> Result<SolverSettings> {
    let d = SolverSettings::default();
    let s = SolverSettings {
        tolerance: raw.float("solver", "tolerance")?.unwrap_or(d.tolerance),
        step_tolerance: raw.float("solver", "step_tolerance")?.unwrap_or(d.step_tolerance),
        max_iterations: raw.uint("solver", "max_iterations")?.unwrap_or(d.max_iterations),
        jacobian: raw.choice(
            "solver",
            "jacobian",
            Some("forward"),
            &[
                ("forward", JacobianMode::ForwardDifference),
                ("central", JacobianMode::CentralDifference),
                ("fourth-order", JacobianMode::FourthOrder),
            ],
        )?,
        fd_step: raw.float("solver", "fd_step")?.unwrap_or(d.fd_step),
    };
    s.validate().map_err(core_err("solver", "tolerance"))?;
    Ok(s)
}

fn parse_diagnostics(raw: &Raw) -> Result<Diagnostics> {
    let mut d = Diagnostics {
        ledger: false,
        energy: false,
    };
    let list = raw.get("output", "diagnostics").unwrap_or("ledger, energy");
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "ledger" => d.ledger = true,
            "energy" => d.energy = true,
            other => return Err(Raw::bad("output", "diagnostics", format!("unknown diagnostic {other:?}"))),
        }
    }
    Ok(d)
}
