//! `run`: build the problem from a config, march it, write the artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use msvi_core::conservation::{relative_drift, EnergyCheck, EnergySeries, MomentumKind, NoetherLedger};
use msvi_core::scenario::{moving_end_data, reconstruct_initial_data, rest_beam, sample_scalar};
use msvi_core::stepper::{space_evolution_field, MarchOutcome};
use msvi_core::{
    BeamModel, BoundaryRegime, DensityModel, DiscreteField, Discretization, GridSpec, GroupElement, GroupKind,
    Retraction, ScalarWaveModel, Stepper,
};
use serde::{Deserialize, Serialize};

use crate::config::{DataSource, Mode, ModelConfig, RunConfig};
use crate::data::{field_nodes, load_prescribed_data, write_nodes, NodeOrder};
use crate::error::{io_err, CliError, Result};

pub const CONFIG_FILE: &str = "config.cfg";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const ENERGY_FILE: &str = "energy.csv";

/// Density and retraction of a run; discretizations borrow from it.
pub struct Setup {
    pub model: Box<dyn DensityModel>,
    pub ret: Retraction,
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let (dt, ds) = (cfg.grid.dt, cfg.grid.ds);
        let model: Box<dyn DensityModel> = match &cfg.model {
            ModelConfig::Beam { params, .. } => {
                Box::new(BeamModel::new(*params, dt, ds)?.with_potential(cfg.model.beam_potential())?)
            }
            ModelConfig::Wave { speed, potential } => {
                Box::new(ScalarWaveModel::new(*speed, dt, ds)?.with_potential(*potential)?)
            }
        };
        let ret = Retraction::new(cfg.retraction, model.group());
        Ok(Setup { model, ret })
    }

    pub fn disc(&self) -> Result<Discretization<'_>> {
        Ok(Discretization::new(self.model.as_ref(), &self.ret)?)
    }
}

/// Whether node `(j, a)` is input data (not solved for) in this run.
pub fn is_prescribed(cfg: &RunConfig, j: usize, a: usize) -> bool {
    match cfg.mode {
        Mode::SpaceEvolution => a <= 1,
        Mode::TimeEvolution => {
            j <= 1 || (cfg.regime == BoundaryRegime::SpaceTime && (a == 0 || a == cfg.grid.n_space))
        }
    }
}

/// Initial field: prescribed nodes hold the data, the rest a starting
/// guess that the march overwrites.
pub fn initial_field(cfg: &RunConfig, disc: &Discretization) -> Result<DiscreteField> {
    let grid = cfg.grid;
    let ret = disc.ret;
    match (&cfg.data, cfg.mode) {
        (DataSource::MovingEnds { xi0, xi1 }, _) => {
            let (g0, eta0) = moving_end_data(ret, &grid, xi0, xi1)?;
            Ok(space_evolution_field(disc, grid, &g0, &eta0)?)
        }
        (DataSource::File { path }, Mode::SpaceEvolution) => {
            let nodes = load_prescribed_data(path, GroupKind::Se3, &grid, |j, a| is_prescribed(cfg, j, a))?;
            let curve = |a: usize| (0..=grid.n_time).map(|j| nodes[&(j, a)].clone()).collect::<Vec<_>>();
            let (g0, eta0) = reconstruct_initial_data(ret, &curve(0), &curve(1), grid.ds)?;
            Ok(space_evolution_field(disc, grid, &g0, &eta0)?)
        }
        (DataSource::File { path }, Mode::TimeEvolution) => {
            let kind = disc.model.group();
            let nodes = load_prescribed_data(path, kind, &grid, |j, a| is_prescribed(cfg, j, a))?;
            let mut field = match kind {
                GroupKind::Se3 => rest_beam(grid)?,
                _ => DiscreteField::filled(grid, GroupElement::identity(kind)),
            };
            for ((j, a), g) in nodes {
                field.set(j, a, g)?;
            }
            Ok(field)
        }
        (DataSource::BeamVelocity { xi }, _) => {
            let step = ret.tau(&(xi * grid.dt))?;
            let rest = rest_beam(grid)?;
            let mut field = rest.clone();
            for a in 0..=grid.n_space {
                let mut g = rest.at(0, a).clone();
                for j in 1..=grid.n_time {
                    g = g.compose(&step)?;
                    field.set(j, a, g.clone())?;
                }
            }
            Ok(field)
        }
        (DataSource::TravellingWave { amplitude, wavenumber }, _) => {
            let c = match cfg.model {
                ModelConfig::Wave { speed, .. } => speed,
                _ => unreachable!("checked when the config was parsed"),
            };
            let k = 2.0 * std::f64::consts::PI * wavenumber;
            Ok(sample_scalar(grid, |t, s| amplitude * (k * (s - c * t)).sin())?)
        }
    }
}

pub fn march(cfg: &RunConfig, stepper: &Stepper, field: &mut DiscreteField) -> MarchOutcome {
    match cfg.mode {
        Mode::SpaceEvolution => stepper.march_space_partial(field),
        Mode::TimeEvolution => stepper.march_time_partial(field),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub slice: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub slice: usize,
    pub iterations: usize,
    pub residual: f64,
    pub step: f64,
    pub converged: bool,
}

/// Nodes present in the trajectory: `j <= max_j`, `a <= max_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extent {
    pub max_j: usize,
    pub max_a: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: RunStatus,
    pub failure: Option<Failure>,
    pub config: BTreeMap<String, BTreeMap<String, String>>,
    pub extent: Extent,
    pub trajectory_order: String,
    pub solves: Vec<SolveRecord>,
    pub max_iterations: usize,
    pub wall_time_seconds: f64,
    pub diagnostics: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))
    }
}

pub fn node_order(mode: Mode) -> NodeOrder {
    match mode {
        Mode::SpaceEvolution => NodeOrder::SpaceSlices,
        Mode::TimeEvolution => NodeOrder::TimeSlices,
    }
}

/// The field restricted to the nodes of `extent`.
pub fn restrict(field: &DiscreteField, extent: Extent) -> Result<DiscreteField> {
    let g = field.grid();
    let grid = GridSpec::new(extent.max_j, extent.max_a, g.dt, g.ds)?;
    Ok(DiscreteField::from_fn(grid, field.kind(), |j, a| field.at(j, a).clone())?)
}

/// Whether the regime has natural boundary conditions in the marching
/// direction, so that the momentum map across slices is conserved.
pub fn conserves_slice_momentum(cfg: &RunConfig) -> bool {
    matches!(cfg.regime, BoundaryRegime::SpaceEvolutionBvp | BoundaryRegime::TimeOnly)
}

/// Ledger, energy series and scalar diagnostics of a (possibly partial)
/// solved field.
pub struct Diagnosis {
    pub ledger: NoetherLedger,
    pub energy: EnergySeries,
    pub values: BTreeMap<String, f64>,
}

pub fn diagnose(cfg: &RunConfig, disc: &Discretization, field: &DiscreteField) -> Result<Diagnosis> {
    let ledger = NoetherLedger::build(disc, field, MomentumKind::Conservative)?;
    let energy = EnergySeries::compute(disc, field)?;
    let g = *field.grid();
    let sym = ledger.symmetry().clone();
    let series = match cfg.mode {
        Mode::SpaceEvolution => &energy.space,
        Mode::TimeEvolution => &energy.time,
    };
    let e = EnergyCheck::new(series);
    let mut values = BTreeMap::new();
    values.insert("max_orthogonality_defect".into(), field.max_orthogonality_defect());
    values.insert("energy_excursion".into(), e.excursion);
    values.insert("energy_first_quarter_range".into(), e.quarter_range);
    values.insert("energy_amplitude".into(), e.amplitude);
    if sym.is_conserving() {
        // Momentum maps projected onto the symmetry algebra.
        let slice_maps: Vec<_> = match cfg.mode {
            Mode::SpaceEvolution => (0..g.n_space).map(|a| sym.restrict(&ledger.space_plus(a))).collect(),
            Mode::TimeEvolution => (0..g.n_time).map(|j| sym.restrict(&ledger.time_plus(j))).collect(),
        };
        let local = (0..g.n_time)
            .flat_map(|j| (0..g.n_space).map(move |a| (j, a)))
            .map(|(j, a)| {
                let [m1, m2, m3] = ledger.maps(j, a);
                sym.restrict(&(&(m1 + m2) + m3)).amax()
            })
            .fold(0.0, f64::max);
        let full = sym.restrict(&ledger.noether_sum(0, g.n_space - 1, 0, g.n_time - 1)?).amax();
        values.insert("momentum_scale".into(), slice_maps[0].amax().max(1.0));
        values.insert("max_local_noether_defect".into(), local);
        values.insert("noether_full_rectangle".into(), full);
        if conserves_slice_momentum(cfg) {
            values.insert("slice_momentum_drift".into(), relative_drift(&slice_maps));
        }
    }
    Ok(Diagnosis { ledger, energy, values })
}

/// Outcome of `run` before verification.
#[derive(Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

/// Marches the configured problem and writes every artifact into the output
/// directory. Returns normally on solver failure too (with the status in
/// the manifest); errors are configuration, data or I/O problems.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let setup = Setup::new(cfg)?;
    let disc = setup.disc()?;
    let mut field = initial_field(cfg, &disc)?;
    let stepper = Stepper::new(disc, cfg.regime, cfg.solver)?;
    let start = Instant::now();
    let outcome = march(cfg, &stepper, &mut field);
    let wall_time_seconds = start.elapsed().as_secs_f64();

    let grid = cfg.grid;
    let extent = match (&outcome.failure, cfg.mode) {
        (None, _) => Extent {
            max_j: grid.n_time,
            max_a: grid.n_space,
        },
        (Some(_), Mode::SpaceEvolution) => Extent {
            max_j: grid.n_time,
            max_a: outcome.last_solved.max(1),
        },
        (Some(_), Mode::TimeEvolution) => Extent {
            max_j: outcome.last_solved.max(1),
            max_a: grid.n_space,
        },
    };
    let order = node_order(cfg.mode);
    let mut files = vec![CONFIG_FILE.to_string(), TRAJECTORY_FILE.to_string()];
    write_nodes(
        &dir.join(TRAJECTORY_FILE),
        field.kind(),
        &field_nodes(&field, order, extent.max_j, extent.max_a),
    )?;
    // A march that fails on its first slices leaves too few nodes for the
    // diagnostics; the trajectory and manifest are still written.
    let mut diagnostics = BTreeMap::new();
    if let Ok(solved) = restrict(&field, extent) {
        let diagnosis = diagnose(cfg, &disc, &solved)?;
        if cfg.diagnostics.ledger {
            write_text(&dir.join(LEDGER_FILE), &diagnosis.ledger.to_csv()?)?;
            files.push(LEDGER_FILE.into());
        }
        if cfg.diagnostics.energy {
            write_text(&dir.join(ENERGY_FILE), &diagnosis.energy.to_csv())?;
            files.push(ENERGY_FILE.into());
        }
        diagnostics = diagnosis.values;
    }
    write_text(&dir.join(CONFIG_FILE), &cfg.to_ini())?;

    let solves = outcome
        .reports
        .iter()
        .map(|r| SolveRecord {
            slice: r.slice,
            iterations: r.iterations,
            residual: r.residual,
            step: r.step,
            converged: r.converged(&cfg.solver),
        })
        .collect();
    let manifest = Manifest {
        status: if outcome.failure.is_none() {
            RunStatus::Complete
        } else {
            RunStatus::SolverFailure
        },
        failure: outcome.failure.as_ref().map(|(slice, e)| Failure {
            slice: *slice,
            message: e.to_string(),
        }),
        config: cfg
            .resolved()
            .into_iter()
            .map(|(s, keys)| (s.to_string(), keys.into_iter().map(|(k, v)| (k.to_string(), v)).collect()))
            .collect(),
        extent,
        trajectory_order: match order {
            NodeOrder::SpaceSlices => "space-slices".into(),
            NodeOrder::TimeSlices => "time-slices".into(),
        },
        solves,
        max_iterations: outcome.max_iterations(),
        wall_time_seconds,
        diagnostics,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Manifest(e.to_string()))?;
    write_text(&dir.join(MANIFEST_FILE), &(json + "\n"))?;
    Ok(RunSummary { dir, manifest })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_err(path))
}
