use std::io::{BufRead, Write};

use super::{FractalGraph, FractalSpec};
use crate::error::{Error, Result};
use crate::output::sig17;

/// `id,x,y,mass` with a header row.
pub fn write_vertices_csv<W: Write>(graph: &FractalGraph, mut w: W) -> Result<()> {
    writeln!(w, "id,x,y,mass")?;
    for (id, (p, m)) in graph.positions().iter().zip(graph.measure()).enumerate() {
        writeln!(w, "{id},{},{},{}", sig17(p[0]), sig17(p[1]), sig17(*m))?;
    }
    Ok(())
}

/// `i,j,conductance` with a header row, i < j.
pub fn write_edges_csv<W: Write>(graph: &FractalGraph, mut w: W) -> Result<()> {
    writeln!(w, "i,j,conductance")?;
    for e in graph.edges() {
        writeln!(w, "{},{},{}", e.i, e.j, sig17(e.conductance))?;
    }
    Ok(())
}

fn fields<R: BufRead>(r: R, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if k == 0 {
            if line != header {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("expected header '{header}', found '{line}'"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        out.push((
            k + 1,
            line.split(',').map(|s| s.trim().to_string()).collect(),
        ));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse '{s}'"),
    })
}

/// Reads the two CSV files written by [`write_vertices_csv`] and
/// [`write_edges_csv`].
pub fn read_graph_csv<R1: BufRead, R2: BufRead>(
    spec: FractalSpec,
    vertices: R1,
    edges: R2,
) -> Result<FractalGraph> {
    let mut positions = Vec::new();
    let mut measure = Vec::new();
    for (line, f) in fields(vertices, "id,x,y,mass")? {
        if f.len() != 4 {
            return Err(Error::Parse {
                line,
                msg: "expected 4 fields".into(),
            });
        }
        let id: usize = num(line, &f[0])?;
        if id != positions.len() {
            return Err(Error::Parse {
                line,
                msg: format!("vertex id {id} out of order"),
            });
        }
        positions.push([num(line, &f[1])?, num(line, &f[2])?]);
        measure.push(num(line, &f[3])?);
    }
    let mut list = Vec::new();
    for (line, f) in fields(edges, "i,j,conductance")? {
        if f.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: "expected 3 fields".into(),
            });
        }
        list.push((num(line, &f[0])?, num(line, &f[1])?, num(line, &f[2])?));
    }
    FractalGraph::from_parts(spec, positions, list, measure)
}
