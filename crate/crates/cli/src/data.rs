//! Node CSV files: trajectories and prescribed boundary data share one
//! layout. SE(3) rows are `j,a,r11,r12,r13,r21,r22,r23,r31,r32,r33,t1,t2,t3`
//! (rotation row-major); R^1 rows are `j,a,y`. Floats are written in the
//! shortest decimal form that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use msvi_core::{DiscreteField, GridSpec, GroupElement, GroupKind};
use nalgebra::{Matrix3, Vector3};

use crate::error::{io_err, CliError, DataError, Result};

/// Largest `|R^T R - I|` accepted when reading rotations.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

const SE3_COLUMNS: [&str; 14] = [
    "j", "a", "r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33", "t1", "t2", "t3",
];
const R1_COLUMNS: [&str; 3] = ["j", "a", "y"];

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub j: usize,
    pub a: usize,
    pub g: GroupElement,
}

fn columns(kind: GroupKind) -> Result<&'static [&'static str]> {
    match kind {
        GroupKind::Se3 => Ok(&SE3_COLUMNS),
        GroupKind::Rn(1) => Ok(&R1_COLUMNS),
        other => Err(CliError::Config(format!("no node file layout for {other:?}"))),
    }
}

/// Order in which a field's nodes are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOrder {
    /// Time slices one after another (`j` outer).
    TimeSlices,
    /// Space slices one after another (`a` outer).
    SpaceSlices,
}

/// Node list of `field` restricted to `j <= max_j`, `a <= max_a`.
pub fn field_nodes(field: &DiscreteField, order: NodeOrder, max_j: usize, max_a: usize) -> Vec<Node> {
    let mut out = Vec::new();
    let node = |j, a| Node {
        j,
        a,
        g: field.at(j, a).clone(),
    };
    match order {
        NodeOrder::TimeSlices => {
            for j in 0..=max_j {
                for a in 0..=max_a {
                    out.push(node(j, a));
                }
            }
        }
        NodeOrder::SpaceSlices => {
            for a in 0..=max_a {
                for j in 0..=max_j {
                    out.push(node(j, a));
                }
            }
        }
    }
    out
}

pub fn write_nodes(path: &Path, kind: GroupKind, nodes: &[Node]) -> Result<()> {
    let cols = columns(kind)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(cols).map_err(csv_err)?;
    for n in nodes {
        let mut rec = vec![n.j.to_string(), n.a.to_string()];
        match &n.g {
            GroupElement::Se3 { rot, trans } => {
                for r in 0..3 {
                    for c in 0..3 {
                        rec.push(rot[(r, c)].to_string());
                    }
                }
                rec.extend(trans.iter().map(|x| x.to_string()));
            }
            GroupElement::Rn(v) => rec.extend(v.iter().map(|x| x.to_string())),
            other => return Err(CliError::Config(format!("no node file layout for {:?}", other.kind()))),
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&bytes).map_err(io_err(path))
}

/// Reads and validates every row: column count, numbers, and for SE(3)
/// a proper rotation (determinant positive, orthogonal within
/// `ORTHOGONALITY_TOLERANCE`).
pub fn read_nodes(path: &Path, kind: GroupKind) -> Result<Vec<Node>> {
    let cols = columns(kind)?;
    let csv_err = |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != cols {
        return Err(DataError::Header {
            expected: cols.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        }
        .into());
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(csv_err)?;
        if rec.len() != cols.len() {
            return Err(DataError::Columns {
                row,
                expected: cols.len(),
                found: rec.len(),
            }
            .into());
        }
        let index = |c: usize| {
            rec[c].parse::<usize>().map_err(|_| DataError::Parse {
                row,
                column: c + 1,
                value: rec[c].to_string(),
            })
        };
        let (j, a) = (index(0)?, index(1)?);
        let values: Vec<f64> = (2..cols.len())
            .map(|c| {
                rec[c].parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| DataError::Parse {
                    row,
                    column: c + 1,
                    value: rec[c].to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        let g = match kind {
            GroupKind::Se3 => {
                let rot = Matrix3::from_row_slice(&values[..9]);
                let det = rot.determinant();
                if det < 0.0 {
                    return Err(DataError::Reflection { row, det }.into());
                }
                let defect = (rot.transpose() * rot - Matrix3::identity()).amax();
                if !(defect <= ORTHOGONALITY_TOLERANCE) {
                    return Err(DataError::NonOrthogonal { row, defect }.into());
                }
                GroupElement::se3(rot, Vector3::from_row_slice(&values[9..]))
            }
            _ => GroupElement::rn(&values),
        };
        out.push(Node { j, a, g });
    }
    Ok(out)
}

/// Reads prescribed data and checks that it covers exactly the nodes
/// selected by `expected` on `grid`, each once.
pub fn load_prescribed_data(
    path: &Path,
    kind: GroupKind,
    grid: &GridSpec,
    expected: impl Fn(usize, usize) -> bool,
) -> Result<BTreeMap<(usize, usize), GroupElement>> {
    let nodes = read_nodes(path, kind)?;
    let mut map = BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        let row = i + 1;
        if n.j > grid.n_time || n.a > grid.n_space || !expected(n.j, n.a) {
            return Err(DataError::UnexpectedNode { row, j: n.j, a: n.a }.into());
        }
        if map.insert((n.j, n.a), n.g.clone()).is_some() {
            return Err(DataError::Duplicate { row, j: n.j, a: n.a }.into());
        }
    }
    let want: Vec<(usize, usize)> = (0..=grid.n_time)
        .flat_map(|j| (0..=grid.n_space).map(move |a| (j, a)))
        .filter(|&(j, a)| expected(j, a))
        .collect();
    if let Some(&(j, a)) = want.iter().find(|k| !map.contains_key(k)) {
        return Err(DataError::Missing {
            j,
            a,
            expected: want.len(),
            found: map.len(),
        }
        .into());
    }
    Ok(map)
}
