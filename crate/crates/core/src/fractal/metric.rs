use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::FractalGraph;
use crate::error::{Error, Result};

/// Largest vertex count for which the dense all-pairs table is built.
pub const MAX_METRIC_VERTICES: usize = 8000;

/// Symmetric all-pairs distance table, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceTable {
    n: usize,
    data: Vec<f64>,
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier(0.0, source));
    while let Some(Frontier(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, len) in &adj[u] {
            let nd = d + len;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier(nd, v));
            }
        }
    }
    dist
}

impl DistanceTable {
    /// Shortest-path distances with Euclidean edge lengths.
    pub fn shortest_paths(graph: &FractalGraph) -> Result<Self> {
        let n = graph.len();
        if n > MAX_METRIC_VERTICES {
            return Err(Error::SizeLimit {
                what: "vertices for the all-pairs metric",
                value: n,
                max: MAX_METRIC_VERTICES,
            });
        }
        let mut adj = vec![Vec::new(); n];
        for e in graph.edges() {
            adj[e.i].push((e.j, e.length));
            adj[e.j].push((e.i, e.length));
        }
        let rows: Vec<Vec<f64>> = crate::par::map_indices(n, |x| dijkstra(&adj, x));
        if let Some(y) = rows
            .first()
            .and_then(|r| r.iter().position(|d| d.is_infinite()))
        {
            return Err(Error::Disconnected(y));
        }
        let mut data = vec![0.0; n * n];
        for (x, row) in rows.iter().enumerate() {
            data[x * n..(x + 1) * n].copy_from_slice(row);
        }
        // Mirror the upper triangle so the table is exactly symmetric.
        for x in 0..n {
            for y in 0..x {
                data[x * n + y] = data[y * n + x];
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.n..(x + 1) * self.n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use crate::fractal::{build_fractal, Family, FractalSpec};

    #[test]
    fn examples() {
        let i = build_fractal(FractalSpec::new(Family::Interval, 3)).unwrap();
        assert_eq!(i.distance(0, 8).unwrap(), 1.0);
        let g = build_fractal(FractalSpec::new(Family::Gasket, 1)).unwrap();
        let p1 = g.nearest_vertex([0.0, 0.0]);
        let p2 = g.nearest_vertex([1.0, 0.0]);
        assert_eq!(g.distance(p1, p2).unwrap(), 1.0);
        for x in 0..g.len() {
            assert_eq!(g.distance(x, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn metric_axioms() {
        for family in Family::ALL {
            let g = build_fractal(FractalSpec::new(family, 2)).unwrap();
            let d = g.metric().unwrap();
            let n = g.len();
            for x in 0..n {
                assert_eq!(d.get(x, x), 0.0);
                for y in 0..n {
                    assert_eq!(d.get(x, y), d.get(y, x));
                    if x != y {
                        assert!(d.get(x, y) > 0.0);
                    }
                    for z in 0..n {
                        assert!(d.get(x, z) <= d.get(x, y) + d.get(y, z) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        use crate::error::Error;
        use crate::fractal::FractalGraph;
        let g = FractalGraph::from_parts(
            FractalSpec::new(Family::Interval, 1),
            vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]],
            vec![(0, 1, 1.0)],
            vec![0.25, 0.5, 0.25],
        )
        .unwrap();
        assert!(matches!(g.metric().unwrap_err(), Error::Disconnected(2)));
    }
}
