//! `reconstruct`: the time advancement of a run, one time slice after
//! another. For space evolution runs this reorders the marched strips into
//! configurations of the whole body at each time node.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use msvi_core::conservation::energy_time;

use crate::config::RunConfig;
use crate::data::{field_nodes, write_nodes, NodeOrder};
use crate::error::Result;
use crate::run::{write_text, Manifest, Setup, CONFIG_FILE};
use crate::verify::load_trajectory;

pub const TIME_SLICES_FILE: &str = "time_slices.csv";
pub const TIME_ENERGY_FILE: &str = "time_energy.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub slices: usize,
    pub files: Vec<PathBuf>,
}

/// Writes `time_slices.csv` (nodes ordered by `j`, then `a`) and
/// `time_energy.csv` (`j,energy`) for the solved part of the run in `dir`.
pub fn reconstruct(dir: &Path) -> Result<Reconstruction> {
    let manifest = Manifest::load(dir)?;
    let cfg = RunConfig::load(&dir.join(CONFIG_FILE))?;
    let setup = Setup::new(&cfg)?;
    let disc = setup.disc()?;
    let field = load_trajectory(dir, &cfg, manifest.extent, setup.model.group())?;
    let g = *field.grid();

    let slices = dir.join(TIME_SLICES_FILE);
    write_nodes(&slices, field.kind(), &field_nodes(&field, NodeOrder::TimeSlices, g.n_time, g.n_space))?;
    let mut text = String::from("j,energy\n");
    for j in 0..g.n_time {
        let _ = writeln!(text, "{j},{}", energy_time(&disc, &field, j)?);
    }
    let energy = dir.join(TIME_ENERGY_FILE);
    write_text(&energy, &text)?;
    Ok(Reconstruction {
        slices: g.n_time + 1,
        files: vec![slices, energy],
    })
}
