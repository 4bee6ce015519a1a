//! On-disk eigendecomposition cache, one entry per (family, level).
//!
//! Each entry is a binary decomposition file plus a `.key` file holding the
//! FNV-1a hash of the graph it was computed from. A missing, stale or
//! corrupt entry is recomputed and rewritten; stale and corrupt entries
//! produce a warning on stderr.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use fracharm::fractal::FractalGraph;
use fracharm::spectral::{
    eigendecompose, fnv1a64, read_cache, write_cache, GeneratorOperator, SpectralDecomposition,
};

/// Where a decomposition came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    Rebuilt,
}

/// Content hash of a graph: positions, measure and edge list.
pub fn graph_key(graph: &FractalGraph) -> u64 {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(graph.family().name().as_bytes());
    bytes.extend_from_slice(&graph.level().to_le_bytes());
    for p in graph.positions() {
        bytes.extend_from_slice(&p[0].to_le_bytes());
        bytes.extend_from_slice(&p[1].to_le_bytes());
    }
    for m in graph.measure() {
        bytes.extend_from_slice(&m.to_le_bytes());
    }
    for e in graph.edges() {
        bytes.extend_from_slice(&(e.i as u64).to_le_bytes());
        bytes.extend_from_slice(&(e.j as u64).to_le_bytes());
        bytes.extend_from_slice(&e.conductance.to_le_bytes());
    }
    fnv1a64(&bytes)
}

pub fn entry_paths(dir: &Path, graph: &FractalGraph) -> (PathBuf, PathBuf) {
    let stem = format!("{}_m{}", graph.family(), graph.level());
    (
        dir.join(format!("{stem}.frspec")),
        dir.join(format!("{stem}.key")),
    )
}

/// The decomposition of `graph`, from the cache when valid.
pub fn load_or_compute(
    dir: &Path,
    graph: &FractalGraph,
) -> fracharm::Result<(SpectralDecomposition, CacheStatus)> {
    let (data, key_file) = entry_paths(dir, graph);
    let key = format!("{:016x}", graph_key(graph));
    let mut status = CacheStatus::Miss;
    if data.exists() {
        let stored = fs::read_to_string(&key_file).unwrap_or_default();
        if stored.trim() != key {
            eprintln!(
                "warning: cache key mismatch for {} (stored `{}`, expected `{key}`); rebuilding",
                data.display(),
                stored.trim()
            );
            status = CacheStatus::Rebuilt;
        } else {
            match fs::File::open(&data)
                .map_err(fracharm::Error::from)
                .and_then(|f| read_cache(std::io::BufReader::new(f), graph.measure()))
            {
                Ok(dec) => return Ok((dec, CacheStatus::Hit)),
                Err(e) => {
                    eprintln!(
                        "warning: unusable cache {}: {e}; rebuilding",
                        data.display()
                    );
                    status = CacheStatus::Rebuilt;
                }
            }
        }
    }
    let dec = eigendecompose(&GeneratorOperator::from_graph(graph)?)?;
    fs::create_dir_all(dir)?;
    write_cache(&dec, BufWriter::new(fs::File::create(&data)?))?;
    fs::write(&key_file, format!("{key}\n"))?;
    Ok((dec, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracharm::fractal::{build_fractal, Family, FractalSpec};

    #[test]
    fn cached_and_cold_decompositions_agree() {
        let dir = tempfile::tempdir().unwrap();
        let g = build_fractal(FractalSpec::new(Family::Gasket, 2)).unwrap();
        let (cold, s0) = load_or_compute(dir.path(), &g).unwrap();
        let (warm, s1) = load_or_compute(dir.path(), &g).unwrap();
        assert_eq!((s0, s1), (CacheStatus::Miss, CacheStatus::Hit));
        assert_eq!(cold.values(), warm.values());
        assert_eq!(cold.vectors().as_slice(), warm.vectors().as_slice());

        let (_, key) = entry_paths(dir.path(), &g);
        fs::write(&key, "0000000000000000\n").unwrap();
        let (_, s2) = load_or_compute(dir.path(), &g).unwrap();
        assert_eq!(s2, CacheStatus::Rebuilt);

        let (data, _) = entry_paths(dir.path(), &g);
        let mut bytes = fs::read(&data).unwrap();
        bytes[20] ^= 0xff;
        fs::write(&data, bytes).unwrap();
        let (again, s3) = load_or_compute(dir.path(), &g).unwrap();
        assert_eq!(s3, CacheStatus::Rebuilt);
        assert_eq!(again.values(), cold.values());
    }

    #[test]
    fn key_depends_on_level() {
        let a = build_fractal(FractalSpec::new(Family::Interval, 3)).unwrap();
        let b = build_fractal(FractalSpec::new(Family::Interval, 4)).unwrap();
        assert_ne!(graph_key(&a), graph_key(&b));
    }
}
