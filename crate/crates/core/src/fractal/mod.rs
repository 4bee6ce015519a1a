//! Level-m graph approximations of the Sierpinski gasket, the Vicsek set and
//! the unit interval, with self-similar measures and renormalized
//! conductances.

mod doubling;
mod io;
mod metric;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use doubling::{fit_doubling, fit_doubling_sampled, sample_quadruples, DoublingFit, VdSample};
pub use io::{read_graph_csv, write_edges_csv, write_vertices_csv};
pub use metric::{DistanceTable, MAX_METRIC_VERTICES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gasket,
    Vicsek,
    Interval,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gasket, Family::Vicsek, Family::Interval];

    pub fn max_level(self) -> u32 {
        match self {
            Family::Gasket => 7,
            Family::Vicsek => 5,
            Family::Interval => 12,
        }
    }

    pub fn scaling(self) -> Scaling {
        match self {
            Family::Gasket => Scaling {
                contraction: 0.5,
                energy_renorm: 5.0 / 3.0,
                time_scale: 5.0,
                d_h: 3f64.ln() / 2f64.ln(),
                d_w: 5f64.ln() / 2f64.ln(),
            },
            Family::Vicsek => Scaling {
                contraction: 1.0 / 3.0,
                energy_renorm: 3.0,
                time_scale: 15.0,
                d_h: 5f64.ln() / 3f64.ln(),
                d_w: 15f64.ln() / 3f64.ln(),
            },
            Family::Interval => Scaling {
                contraction: 0.5,
                energy_renorm: 2.0,
                time_scale: 4.0,
                d_h: 1.0,
                d_w: 2.0,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Gasket => "gasket",
            Family::Vicsek => "vicsek",
            Family::Interval => "interval",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gasket" | "sierpinski" => Ok(Family::Gasket),
            "vicsek" => Ok(Family::Vicsek),
            "interval" => Ok(Family::Interval),
            other => Err(Error::invalid(format!(
                "unknown fractal family '{other}' (expected gasket, vicsek or interval)"
            ))),
        }
    }
}

/// Scaling constants of a self-similar family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    /// Contraction ratio of the similitudes.
    pub contraction: f64,
    /// Per-level conductance factor.
    pub energy_renorm: f64,
    /// Per-level eigenvalue factor (spectral decimation ratio).
    pub time_scale: f64,
    pub d_h: f64,
    pub d_w: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FractalSpec {
    pub family: Family,
    pub level: u32,
}

impl FractalSpec {
    pub fn new(family: Family, level: u32) -> Self {
        Self { family, level }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub conductance: f64,
    pub length: f64,
}

/// Weighted graph approximation of a fractal. Immutable once built.
#[derive(Debug)]
pub struct FractalGraph {
    spec: FractalSpec,
    positions: Vec<[f64; 2]>,
    edges: Vec<Edge>,
    measure: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
    scaling: Scaling,
    metric: OnceLock<DistanceTable>,
}

impl FractalGraph {
    /// Assembles a graph from raw parts. Edges with i == j are rejected; parallel
    /// edges are merged by adding conductances.
    pub fn from_parts(
        spec: FractalSpec,
        positions: Vec<[f64; 2]>,
        edges: Vec<(usize, usize, f64)>,
        measure: Vec<f64>,
    ) -> Result<Self> {
        let n = positions.len();
        if measure.len() != n {
            return Err(Error::invalid("measure length differs from vertex count"));
        }
        if let Some((i, m)) = measure.iter().enumerate().find(|(_, m)| !(**m > 0.0)) {
            return Err(Error::invalid(format!(
                "vertex {i} has non-positive mass {m}"
            )));
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, c) in edges {
            if i == j || i >= n || j >= n {
                return Err(Error::invalid(format!("bad edge ({i}, {j})")));
            }
            if !(c > 0.0) {
                return Err(Error::invalid(format!(
                    "edge ({i}, {j}) has conductance {c}"
                )));
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
        }
        let edges: Vec<Edge> = merged
            .into_iter()
            .map(|((i, j), c)| {
                let [xi, yi] = positions[i];
                let [xj, yj] = positions[j];
                Edge {
                    i,
                    j,
                    conductance: c,
                    length: (xi - xj).hypot(yi - yj),
                }
            })
            .collect();
        let mut neighbors = vec![Vec::new(); n];
        for e in &edges {
            neighbors[e.i].push((e.j, e.conductance));
            neighbors[e.j].push((e.i, e.conductance));
        }
        Ok(Self {
            spec,
            positions,
            edges,
            measure,
            neighbors,
            scaling: spec.family.scaling(),
            metric: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> FractalSpec {
        self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn level(&self) -> u32 {
        self.spec.level
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.neighbors[x]
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    pub fn d_h(&self) -> f64 {
        self.scaling.d_h
    }

    pub fn d_w(&self) -> f64 {
        self.scaling.d_w
    }

    /// Shortest edge length (the mesh size).
    pub fn mesh(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    /// All-pairs shortest-path distances; computed on first use.
    pub fn metric(&self) -> Result<&DistanceTable> {
        if let Some(t) = self.metric.get() {
            return Ok(t);
        }
        let table = DistanceTable::shortest_paths(self)?;
        Ok(self.metric.get_or_init(|| table))
    }

    pub fn distance(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.metric()?.get(x, y))
    }

    /// Open metric ball {y : d(center, y) < r}.
    pub fn ball(&self, center: usize, r: f64) -> Result<Vec<usize>> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!(
                "ball radius must be positive, got {r}"
            )));
        }
        let row = self.metric()?.row(center);
        Ok((0..self.len()).filter(|&y| row[y] < r).collect())
    }

    pub fn volume(&self, set: &[usize]) -> f64 {
        set.iter().map(|&x| self.measure[x]).sum()
    }

    /// mu(B(center, r)) without materializing the ball.
    pub fn ball_volume(&self, center: usize, r: f64) -> Result<f64> {
        let row = self.metric()?.row(center);
        Ok(row
            .iter()
            .zip(&self.measure)
            .filter(|(d, _)| **d < r)
            .map(|(_, m)| m)
            .sum())
    }

    pub fn diameter(&self) -> Result<f64> {
        Ok(self.metric()?.max())
    }

    /// Vertex closest (Euclidean) to a point of the plane; ties go to the lower id.
    pub fn nearest_vertex(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.positions.iter().enumerate() {
            let d = (q[0] - p[0]).hypot(q[1] - p[1]);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// (Lf)(x) = mu(x)^{-1} sum_y c_xy (f(y) - f(x)).
    pub fn apply_generator(&self, f: &[f64], out: &mut [f64]) {
        for x in 0..self.len() {
            let acc: f64 = self.neighbors[x]
                .iter()
                .map(|&(y, c)| c * (f[y] - f[x]))
                .sum();
            out[x] = acc / self.measure[x];
        }
    }

    /// Graph Laplacian without the mass: sum_y c_xy (f(x) - f(y)).
    pub fn apply_laplacian(&self, f: &[f64], out: &mut [f64]) {
        for x in 0..self.len() {
            out[x] = self.neighbors[x]
                .iter()
                .map(|&(y, c)| c * (f[x] - f[y]))
                .sum();
        }
    }

    /// Dirichlet form E(f, g) = sum over edges c (f(i) - f(j)) (g(i) - g(j)).
    pub fn energy(&self, f: &[f64], g: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.conductance * (f[e.i] - f[e.j]) * (g[e.i] - g[e.j]))
            .sum()
    }

    pub fn degree(&self, x: usize) -> f64 {
        self.neighbors[x].iter().map(|&(_, c)| c).sum()
    }
}

/// Builds the level-m approximation described by `spec`.
pub fn build_fractal(spec: FractalSpec) -> Result<FractalGraph> {
    let max = spec.family.max_level();
    if spec.level > max {
        return Err(Error::SizeLimit {
            what: "fractal level",
            value: spec.level as usize,
            max: max as usize,
        });
    }
    let cells = match spec.family {
        Family::Gasket => gasket_cells(spec.level),
        Family::Vicsek => vicsek_cells(spec.level),
        Family::Interval => interval_cells(spec.level),
    };
    assemble(spec, cells)
}

// One m-cell: lattice keys of its vertices, local edges and its mass.
struct Cell {
    keys: Vec<(i64, i64)>,
    edges: &'static [(usize, usize)],
    mass: f64,
}

const TRIANGLE: &[(usize, usize)] = &[(0, 1), (0, 2), (1, 2)];
const CROSS: &[(usize, usize)] = &[(0, 4), (1, 4), (2, 4), (3, 4)];
const SEGMENT: &[(usize, usize)] = &[(0, 1)];

// Gasket keys (a, b) stand for a e1 + b e2 at scale 2^-m with e1 = (1, 0),
// e2 = (1/2, sqrt(3)/2).
/// Cells of a level, the lattice-to-plane map, and the lattice unit.
type CellLayout = (Vec<Cell>, Box<dyn Fn((i64, i64)) -> [f64; 2]>, f64);

fn gasket_cells(level: u32) -> CellLayout {
    let side = 1i64 << level;
    let mass = 3f64.powi(-(level as i32));
    let mut cells = Vec::with_capacity(3usize.pow(level));
    let mut stack = vec![(0i64, 0i64, side)];
    while let Some((a, b, s)) = stack.pop() {
        if s == 1 {
            cells.push(Cell {
                keys: vec![(a, b), (a + s, b), (a, b + s)],
                edges: TRIANGLE,
                mass,
            });
            continue;
        }
        let h = s / 2;
        stack.push((a, b + h, h));
        stack.push((a + h, b, h));
        stack.push((a, b, h));
    }
    let scale = side as f64;
    let pos = Box::new(move |(a, b): (i64, i64)| {
        let (a, b) = (a as f64, b as f64);
        [(a + 0.5 * b) / scale, b * (3f64.sqrt() / 2.0) / scale]
    });
    let conductance = (5.0f64 / 3.0).powi(level as i32);
    (cells, pos, conductance)
}

// Vicsek keys are in units of 3^-m / 2 so cell centres are integral.
fn vicsek_cells(level: u32) -> CellLayout {
    let side = 2 * 3i64.pow(level);
    let mass = 5f64.powi(-(level as i32));
    let mut cells = Vec::with_capacity(5usize.pow(level));
    let mut stack = vec![(0i64, 0i64, side)];
    while let Some((i, j, s)) = stack.pop() {
        if s == 2 {
            cells.push(Cell {
                keys: vec![
                    (i, j),
                    (i + s, j),
                    (i, j + s),
                    (i + s, j + s),
                    (i + s / 2, j + s / 2),
                ],
                edges: CROSS,
                mass,
            });
            continue;
        }
        let t = s / 3;
        for (di, dj) in [(t, t), (0, 2 * t), (2 * t, 2 * t), (2 * t, 0), (0, 0)] {
            stack.push((i + di, j + dj, t));
        }
    }
    let scale = side as f64;
    let pos = Box::new(move |(i, j): (i64, i64)| [i as f64 / scale, j as f64 / scale]);
    (cells, pos, 3f64.powi(level as i32))
}

fn interval_cells(level: u32) -> CellLayout {
    let n = 1i64 << level;
    let mass = 1.0 / n as f64;
    let cells = (0..n)
        .map(|i| Cell {
            keys: vec![(i, 0), (i + 1, 0)],
            edges: SEGMENT,
            mass,
        })
        .collect();
    let scale = n as f64;
    let pos = Box::new(move |(i, _): (i64, i64)| [i as f64 / scale, 0.0]);
    (cells, pos, n as f64)
}

type CellSet = CellLayout;

fn assemble(spec: FractalSpec, (cells, pos, conductance): CellSet) -> Result<FractalGraph> {
    // Exact integer keys make coordinate merging exact.
    let mut keys: Vec<(i64, i64)> = cells.iter().flat_map(|c| c.keys.iter().copied()).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut points: Vec<([f64; 2], (i64, i64))> = keys.iter().map(|&k| (pos(k), k)).collect();
    points.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
    let index: BTreeMap<(i64, i64), usize> = points
        .iter()
        .enumerate()
        .map(|(i, (_, k))| (*k, i))
        .collect();

    let n = points.len();
    let mut measure = vec![0.0; n];
    let mut edges = Vec::new();
    for cell in &cells {
        let ids: Vec<usize> = cell.keys.iter().map(|k| index[k]).collect();
        let share = cell.mass / ids.len() as f64;
        for &v in &ids {
            measure[v] += share;
        }
        for &(a, b) in cell.edges {
            edges.push((ids[a], ids[b], conductance));
        }
    }
    let positions = points.into_iter().map(|(p, _)| p).collect();
    FractalGraph::from_parts(spec, positions, edges, measure)
}
