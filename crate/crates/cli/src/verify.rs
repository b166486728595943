//! `verify`: re-checks a run directory from its own artifacts.

use std::fmt;
use std::path::Path;

use msvi_core::{BoundaryRegime, DiscreteField, GroupElement, Stepper};
use msvi_core::solver::residual_vector;

use crate::config::{Mode, RunConfig};
use crate::data::read_nodes;
use crate::error::{io_err, Result};
use crate::run::{
    diagnose, restrict, Extent, Manifest, RunStatus, Setup, CONFIG_FILE, ENERGY_FILE, LEDGER_FILE, TRAJECTORY_FILE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "ok  " } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn bound(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        pass: value <= limit,
        detail: format!("{value:.3e} (limit {limit:.1e})"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub status: RunStatus,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.status == RunStatus::Complete && self.checks.iter().all(|c| c.pass)
    }
}

/// Reloads config, manifest and trajectory from `dir` and checks them. A run
/// that stopped on a solver failure is reported without further checks.
pub fn verify(dir: &Path) -> Result<VerifyReport> {
    let manifest = Manifest::load(dir)?;
    if manifest.status == RunStatus::SolverFailure {
        let detail = match &manifest.failure {
            Some(f) => format!("slice {}: {}", f.slice, f.message),
            None => "no failure recorded".into(),
        };
        return Ok(VerifyReport {
            status: manifest.status,
            checks: vec![Check {
                name: "solver",
                pass: false,
                detail,
            }],
        });
    }
    let cfg = RunConfig::load(&dir.join(CONFIG_FILE))?;
    let setup = Setup::new(&cfg)?;
    let disc = setup.disc()?;
    let mut checks = Vec::new();

    let field = match load_trajectory(dir, &cfg, manifest.extent, setup.model.group()) {
        Ok(f) => f,
        Err(e) => {
            checks.push(Check {
                name: "trajectory",
                pass: false,
                detail: e.to_string(),
            });
            return Ok(VerifyReport {
                status: manifest.status,
                checks,
            });
        }
    };
    checks.push(Check {
        name: "trajectory",
        pass: true,
        detail: format!("{} nodes", field.grid().node_count()),
    });

    let unconverged = manifest.solves.iter().filter(|s| !s.converged).count();
    checks.push(Check {
        name: "solves converged",
        pass: unconverged == 0,
        detail: format!("{} of {} solves", manifest.solves.len() - unconverged, manifest.solves.len()),
    });

    let stepper = Stepper::new(disc, cfg.regime, cfg.solver)?;
    let g = *field.grid();
    let mut systems = Vec::new();
    match cfg.mode {
        Mode::SpaceEvolution => {
            if cfg.regime == BoundaryRegime::SpaceEvolutionBvp {
                systems.push(stepper.terminal_system(&field, 1));
            }
            for a in 1..g.n_space {
                systems.push(stepper.space_system(&field, a)?);
            }
        }
        Mode::TimeEvolution => {
            if cfg.regime == BoundaryRegime::TimeOnly {
                systems.push(stepper.far_end_system(&field, 1));
            }
            for j in 1..g.n_time {
                systems.push(stepper.time_system(&field, j)?);
            }
        }
    }
    let mut residual: f64 = 0.0;
    for sys in &systems {
        residual = residual.max(residual_vector(&stepper.disc, &field, sys)?.amax());
    }
    checks.push(bound("discrete field equations", residual, cfg.verify.residual));

    let diagnosis = diagnose(&cfg, &stepper.disc, &field)?;
    let v = &diagnosis.values;
    match v.get("momentum_scale") {
        Some(&scale) => {
            let tol = cfg.verify.noether * scale;
            checks.push(bound("local Noether defect", v["max_local_noether_defect"], tol));
            checks.push(bound("Noether sum, full rectangle", v["noether_full_rectangle"], tol));
            if let Some(&drift) = v.get("slice_momentum_drift") {
                checks.push(bound("slice momentum drift (relative)", drift, cfg.verify.drift));
            }
        }
        None => checks.push(Check {
            name: "momentum maps",
            pass: true,
            detail: "not checked, the model has no continuous symmetry".into(),
        }),
    }

    let expected = [
        (LEDGER_FILE, cfg.diagnostics.ledger, diagnosis.ledger.to_csv()?),
        (ENERGY_FILE, cfg.diagnostics.energy, diagnosis.energy.to_csv()),
    ];
    for (file, enabled, text) in expected {
        if !enabled {
            continue;
        }
        let path = dir.join(file);
        let found = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        checks.push(Check {
            name: file,
            pass: found == text,
            detail: if found == text {
                "matches recomputation".into()
            } else {
                "differs from recomputation".into()
            },
        });
    }
    Ok(VerifyReport {
        status: manifest.status,
        checks,
    })
}

/// Trajectory of a run as a field over `extent`; every node must appear once.
pub fn load_trajectory(
    dir: &Path,
    cfg: &RunConfig,
    extent: Extent,
    kind: msvi_core::GroupKind,
) -> Result<DiscreteField> {
    let nodes = read_nodes(&dir.join(TRAJECTORY_FILE), kind)?;
    let mut field = DiscreteField::filled(cfg.grid, GroupElement::identity(kind));
    let within = |j: usize, a: usize| j <= extent.max_j && a <= extent.max_a;
    let mut seen = vec![false; (extent.max_j + 1) * (extent.max_a + 1)];
    for (i, n) in nodes.iter().enumerate() {
        let row = i + 1;
        if !within(n.j, n.a) {
            return Err(crate::error::DataError::UnexpectedNode { row, j: n.j, a: n.a }.into());
        }
        let k = n.j * (extent.max_a + 1) + n.a;
        if std::mem::replace(&mut seen[k], true) {
            return Err(crate::error::DataError::Duplicate { row, j: n.j, a: n.a }.into());
        }
        field.set(n.j, n.a, n.g.clone())?;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(crate::error::DataError::Missing {
            j: k / (extent.max_a + 1),
            a: k % (extent.max_a + 1),
            expected: seen.len(),
            found: nodes.len(),
        }
        .into());
    }
    restrict(&field, extent)
}
