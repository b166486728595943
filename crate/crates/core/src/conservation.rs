//! Discrete momentum maps, Noether sums and energies.
//!
//! For a triangle with base point `g` and Legendre covectors `F1, F2, F3`,
//! the covariant momentum maps (in the dual of the symmetry algebra) are
//!
//! ```text
//! J1 = i* Ad*_{g^{-1}} F1
//! J2 = i* Ad*_{g^{-1}} mu / dt
//! J3 = i* Ad*_{g^{-1}} lambda / ds
//! ```
//!
//! so that `J1 + J2 + J3 = i* Ad*_{g^{-1}} d_g Lbar`, which vanishes for an
//! invariant density.

use std::fmt::Write as _;

use crate::dcel::Discretization;
use crate::error::{Error, Result};
use crate::field::{DiscreteField, GridSpec, Jet};
use crate::group::CoAlgebraVector;
use crate::model::Symmetry;

/// How force covectors enter the forced momentum maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcedConvention {
    /// Each force covector is mapped to the spatial frame at the vertex it
    /// acts on: `J^{k,F} = J^k + i* Ad*_{g_k^{-1}} Fbar^k`. With forces whose
    /// spatial resultant vanishes, the forced Noether sums vanish on
    /// solutions.
    Consistent,
    /// Force covectors are added to the momenta before the scaling and the
    /// base-point map: `J^{2,F} = i* Ad*_{g^{-1}} (mu + Fbar^2) / dt`,
    /// `J^{3,F} = i* Ad*_{g^{-1}} (lambda + Fbar^3) / ds`.
    AsDisplayed,
}

/// Which momentum maps a ledger records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumKind {
    Conservative,
    Forced(ForcedConvention),
}

/// Covariant momentum maps of a single jet.
pub fn jet_momentum_maps(disc: &Discretization, jet: &Jet, kind: MomentumKind) -> Result<[CoAlgebraVector; 3]> {
    let cov = disc.covectors(jet)?;
    let sym = disc.model.symmetry();
    let g_inv = jet.g.inverse();
    let spatial = |m: &CoAlgebraVector| -> Result<CoAlgebraVector> { Ok(sym.restrict(&g_inv.ad_star(m)?)) };
    let (dt, ds) = (disc.dt(), disc.ds());
    let mut out = [
        spatial(&cov.legendre[0])?,
        spatial(&(&cov.mu * (1.0 / dt)))?,
        spatial(&(&cov.lambda * (1.0 / ds)))?,
    ];
    match kind {
        MomentumKind::Conservative => {}
        MomentumKind::Forced(ForcedConvention::Consistent) => {
            let [v1, v2, v3] = jet.vertices()?;
            for (k, v) in [v1, v2, v3].iter().enumerate() {
                let f = sym.restrict(&v.inverse().ad_star(&cov.forces[k])?);
                out[k] += &f;
            }
        }
        MomentumKind::Forced(ForcedConvention::AsDisplayed) => {
            out[0] += &spatial(&cov.forces[0])?;
            out[1] = spatial(&(&(&cov.mu + &cov.forces[1]) * (1.0 / dt)))?;
            out[2] = spatial(&(&(&cov.lambda + &cov.forces[2]) * (1.0 / ds)))?;
        }
    }
    Ok(out)
}

/// Covariant momentum maps of triangle `(j, a)`.
pub fn covariant_momentum_maps(
    disc: &Discretization,
    field: &DiscreteField,
    j: usize,
    a: usize,
    kind: MomentumKind,
) -> Result<[CoAlgebraVector; 3]> {
    jet_momentum_maps(disc, &disc.jet(field, j, a)?, kind)
}

/// Momentum maps of every triangle of a field.
#[derive(Debug, Clone)]
pub struct NoetherLedger {
    grid: GridSpec,
    dim: usize,
    maps: Vec<[CoAlgebraVector; 3]>,
    symmetry: Symmetry,
}

impl NoetherLedger {
    pub fn build(disc: &Discretization, field: &DiscreteField, kind: MomentumKind) -> Result<Self> {
        disc.check_field(field)?;
        let grid = *field.grid();
        let mut maps = Vec::with_capacity(grid.n_time * grid.n_space);
        for j in 0..grid.n_time {
            for a in 0..grid.n_space {
                maps.push(covariant_momentum_maps(disc, field, j, a, kind)?);
            }
        }
        let dim = maps[0][0].dim();
        Ok(NoetherLedger {
            grid,
            dim,
            maps,
            symmetry: disc.model.symmetry(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Dimension of the symmetry algebra.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symmetry(&self) -> &Symmetry {
        &self.symmetry
    }

    /// `[J1, J2, J3]` of triangle `(j, a)`.
    pub fn maps(&self, j: usize, a: usize) -> &[CoAlgebraVector; 3] {
        &self.maps[j * self.grid.n_space + a]
    }

    fn jk(&self, k: usize, j: usize, a: usize) -> &CoAlgebraVector {
        &self.maps(j, a)[k]
    }

    fn zero(&self) -> CoAlgebraVector {
        CoAlgebraVector::zeros(self.dim)
    }

    /// `|J1 + J2 + J3|` on triangle `(j, a)`.
    pub fn local_defect(&self, j: usize, a: usize) -> f64 {
        let [m1, m2, m3] = self.maps(j, a);
        (&(m1 + m2) + m3).amax()
    }

    pub fn max_local_defect(&self) -> f64 {
        (0..self.grid.n_time)
            .flat_map(|j| (0..self.grid.n_space).map(move |a| (j, a)))
            .map(|(j, a)| self.local_defect(j, a))
            .fold(0.0, f64::max)
    }

    /// Noether sum over the boundary of the rectangle of triangles
    /// `B <= a <= C`, `K <= j <= L`.
    pub fn noether_sum(&self, b: usize, c: usize, k: usize, l: usize) -> Result<CoAlgebraVector> {
        if !(b <= c && c < self.grid.n_space) {
            return Err(Error::IndexOutOfRange {
                what: "rectangle space bound",
                index: c,
                limit: self.grid.n_space - 1,
            });
        }
        if !(k <= l && l < self.grid.n_time) {
            return Err(Error::IndexOutOfRange {
                what: "rectangle time bound",
                index: l,
                limit: self.grid.n_time - 1,
            });
        }
        let mut s = self.zero();
        for j in k + 1..=l {
            s += self.jk(0, j, b);
            s += self.jk(1, j - 1, b);
            s += self.jk(2, j, c);
        }
        for a in b + 1..=c {
            s += self.jk(0, k, a);
            s += self.jk(1, l, a);
            s += self.jk(2, k, a - 1);
        }
        s += self.jk(0, k, b);
        s += self.jk(1, l, b);
        s += self.jk(2, k, c);
        Ok(s)
    }

    /// `J_L^+(j) = sum_a J2(j, a)`.
    pub fn time_plus(&self, j: usize) -> CoAlgebraVector {
        let mut s = self.zero();
        for a in 0..self.grid.n_space {
            s += self.jk(1, j, a);
        }
        s
    }

    /// `J_L^-(j) = -sum_a (J1 + J3)(j, a)`.
    pub fn time_minus(&self, j: usize) -> CoAlgebraVector {
        let mut s = self.zero();
        for a in 0..self.grid.n_space {
            s -= self.jk(0, j, a);
            s -= self.jk(2, j, a);
        }
        s
    }

    /// `J_N^+(a) = sum_j J3(j, a)`.
    pub fn space_plus(&self, a: usize) -> CoAlgebraVector {
        let mut s = self.zero();
        for j in 0..self.grid.n_time {
            s += self.jk(2, j, a);
        }
        s
    }

    /// `J_N^-(a) = -sum_j (J1 + J2)(j, a)`.
    pub fn space_minus(&self, a: usize) -> CoAlgebraVector {
        let mut s = self.zero();
        for j in 0..self.grid.n_time {
            s -= self.jk(0, j, a);
            s -= self.jk(1, j, a);
        }
        s
    }

    /// Contributions of the spatial ends over time slices `K+1..=L`:
    /// `sum_j J1(j, 0) + J2(j-1, 0) + J3(j, A-1)`.
    pub fn spatial_end_flux(&self, k: usize, l: usize) -> CoAlgebraVector {
        let m = self.grid.n_space;
        let mut s = self.zero();
        for j in k + 1..=l {
            s += self.jk(0, j, 0);
            s += self.jk(1, j - 1, 0);
            s += self.jk(2, j, m - 1);
        }
        s
    }

    /// Contributions of the temporal ends over space slices `B+1..=C`:
    /// `sum_a J1(0, a) + J2(N-1, a) + J3(0, a-1)`.
    pub fn temporal_end_flux(&self, b: usize, c: usize) -> CoAlgebraVector {
        let n = self.grid.n_time;
        let mut s = self.zero();
        for a in b + 1..=c {
            s += self.jk(0, 0, a);
            s += self.jk(1, n - 1, a);
            s += self.jk(2, 0, a - 1);
        }
        s
    }

    /// Largest relative drift of `J_N^+(a)` over all space slices, measured
    /// against the norm of `J_N^+(0)` (absolute when that norm is below 1).
    pub fn space_map_drift(&self) -> f64 {
        let series: Vec<_> = (0..self.grid.n_space).map(|a| self.space_plus(a)).collect();
        relative_drift(&series)
    }

    /// Largest relative drift of `J_L^+(j)` over all time slices.
    pub fn time_map_drift(&self) -> f64 {
        let series: Vec<_> = (0..self.grid.n_time).map(|j| self.time_plus(j)).collect();
        relative_drift(&series)
    }

    /// CSV dump: `record,i1,i2,i3,i4,c0..c{d-1}` with records `J1`, `J2`,
    /// `J3` (indices j, a), `JL_plus`, `JL_minus` (index j), `JN_plus`,
    /// `JN_minus` (index a) and `noether_sum` (indices B, C, K, L of the full
    /// rectangle).
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("record,i1,i2,i3,i4");
        for c in 0..self.dim {
            let _ = write!(out, ",c{c}");
        }
        out.push('\n');
        let row = |out: &mut String, rec: &str, idx: [Option<usize>; 4], v: &CoAlgebraVector| {
            out.push_str(rec);
            for i in idx {
                match i {
                    Some(i) => {
                        let _ = write!(out, ",{i}");
                    }
                    None => out.push(','),
                }
            }
            for x in v.as_slice() {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        };
        let (n, m) = (self.grid.n_time, self.grid.n_space);
        for j in 0..n {
            for a in 0..m {
                for (k, rec) in ["J1", "J2", "J3"].iter().enumerate() {
                    row(&mut out, rec, [Some(j), Some(a), None, None], self.jk(k, j, a));
                }
            }
        }
        for j in 0..n {
            row(&mut out, "JL_plus", [Some(j), None, None, None], &self.time_plus(j));
            row(&mut out, "JL_minus", [Some(j), None, None, None], &self.time_minus(j));
        }
        for a in 0..m {
            row(&mut out, "JN_plus", [Some(a), None, None, None], &self.space_plus(a));
            row(&mut out, "JN_minus", [Some(a), None, None, None], &self.space_minus(a));
        }
        let full = self.noether_sum(0, m - 1, 0, n - 1)?;
        row(&mut out, "noether_sum", [Some(0), Some(m - 1), Some(0), Some(n - 1)], &full);
        Ok(out)
    }
}

/// Largest `|v_i - v_0|` over a series, divided by `max(|v_0|, 1)`
/// (max-norms).
pub fn relative_drift(series: &[CoAlgebraVector]) -> f64 {
    let Some(first) = series.first() else {
        return 0.0;
    };
    let scale = first.amax().max(1.0);
    series
        .iter()
        .map(|v| (v - first).amax() / scale)
        .fold(0.0, f64::max)
}

/// Discrete energy of time slice `j`: `sum_a (<D_xi Lbar, xi> - Lbar) / dt`.
pub fn energy_time(disc: &Discretization, field: &DiscreteField, j: usize) -> Result<f64> {
    let m = field.grid().n_space;
    let mut e = 0.0;
    for a in 0..m {
        let jet = disc.jet(field, j, a)?;
        let l = disc.model.evaluate(&jet.g, &jet.xi, &jet.eta);
        let p = disc.model.d_xi(&jet.g, &jet.xi, &jet.eta);
        e += p.pair(&jet.xi) - l;
    }
    Ok(e / disc.dt())
}

/// Discrete energy of space slice `a`: `sum_j (<D_eta Lbar, eta> - Lbar) / ds`.
pub fn energy_space(disc: &Discretization, field: &DiscreteField, a: usize) -> Result<f64> {
    let n = field.grid().n_time;
    let mut e = 0.0;
    for j in 0..n {
        let jet = disc.jet(field, j, a)?;
        let l = disc.model.evaluate(&jet.g, &jet.xi, &jet.eta);
        let p = disc.model.d_eta(&jet.g, &jet.xi, &jet.eta);
        e += p.pair(&jet.eta) - l;
    }
    Ok(e / disc.ds())
}

/// Energy series over all time slices (`j < N`) and all space slices
/// (`a < A`).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub time: Vec<f64>,
    pub space: Vec<f64>,
}

impl EnergySeries {
    pub fn compute(disc: &Discretization, field: &DiscreteField) -> Result<Self> {
        let g = field.grid();
        Ok(EnergySeries {
            time: (0..g.n_time)
                .map(|j| energy_time(disc, field, j))
                .collect::<Result<_>>()?,
            space: (0..g.n_space)
                .map(|a| energy_space(disc, field, a))
                .collect::<Result<_>>()?,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("record,index,value\n");
        for (j, e) in self.time.iter().enumerate() {
            let _ = writeln!(out, "E_time,{j},{e}");
        }
        for (a, e) in self.space.iter().enumerate() {
            let _ = writeln!(out, "E_space,{a},{e}");
        }
        out
    }
}

/// Bounded-oscillation check of an energy series against the range seen on
/// its first quarter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCheck {
    /// `max_i |E_i - E_0|`.
    pub excursion: f64,
    /// `max - min` over the first quarter (at least two entries).
    pub quarter_range: f64,
    /// `max - min` over the whole series.
    pub amplitude: f64,
    /// Largest distance outside the first-quarter band `[min, max]`.
    pub outside_band: f64,
}

impl EnergyCheck {
    pub fn new(series: &[f64]) -> Self {
        let Some(&e0) = series.first() else {
            return EnergyCheck {
                excursion: 0.0,
                quarter_range: 0.0,
                amplitude: 0.0,
                outside_band: 0.0,
            };
        };
        let range = |s: &[f64]| {
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let q = (series.len() / 4).max(2).min(series.len());
        let (qlo, qhi) = range(&series[..q]);
        let (lo, hi) = range(series);
        let outside_band = series
            .iter()
            .map(|&e| (qlo - e).max(e - qhi).max(0.0))
            .fold(0.0, f64::max);
        EnergyCheck {
            excursion: series.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max),
            quarter_range: qhi - qlo,
            amplitude: hi - lo,
            outside_band,
        }
    }

    /// `excursion <= 0.05 * quarter_range`.
    pub fn literal_pass(&self) -> bool {
        self.excursion <= 0.05 * self.quarter_range
    }

    /// No value leaves the first-quarter band widened to 105% of its width.
    pub fn widened_pass(&self) -> bool {
        self.outside_band <= 0.025 * self.quarter_range
    }
}
