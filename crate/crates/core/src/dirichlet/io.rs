//! Text format for Dirichlet problems and CSV export of solutions.
//!
//! ```text
//! # comments start with '#'
//! s = 0.5
//! domain = 3 4 5 6
//! [exterior]
//! 0 1.0
//! 1 0.25
//! ...
//! ```
//!
//! The exterior table lists `vertex_id value` for every vertex outside the
//! domain, one per line.

use std::io::{Read, Write};

use super::DirichletProblem;
use crate::error::{Error, Result};
use crate::output::sig17;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a problem for a graph with `n` vertices.
pub fn parse_problem(text: &str, n: usize) -> Result<DirichletProblem> {
    let mut s = None;
    let mut domain: Option<Vec<usize>> = None;
    let mut datum: Vec<Option<f64>> = vec![None; n];
    let mut in_table = false;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "[exterior]" {
            in_table = true;
            continue;
        }
        if in_table {
            let mut it = line.split_whitespace();
            let (Some(id), Some(val), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(line_no, "expected `vertex_id value`"));
            };
            let id: usize = id
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad vertex id `{id}`")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad value `{val}`")))?;
            let slot = datum
                .get_mut(id)
                .ok_or_else(|| parse_err(line_no, format!("vertex {id} out of range (n = {n})")))?;
            if slot.replace(val).is_some() {
                return Err(parse_err(line_no, format!("vertex {id} listed twice")));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(line_no, "expected `key = value`"));
        };
        match key.trim() {
            "s" => {
                s =
                    Some(value.trim().parse::<f64>().map_err(|_| {
                        parse_err(line_no, format!("bad exponent `{}`", value.trim()))
                    })?)
            }
            "domain" => {
                let ids = value
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| parse_err(line_no, format!("bad vertex id `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                domain = Some(ids);
            }
            other => return Err(parse_err(line_no, format!("unknown key `{other}`"))),
        }
    }
    let s = s.ok_or_else(|| parse_err(0, "missing `s`"))?;
    let domain = domain.ok_or_else(|| parse_err(0, "missing `domain`"))?;
    let mut inside = vec![false; n];
    for &x in &domain {
        if x < n {
            inside[x] = true;
        }
    }
    let mut values = vec![0.0; n];
    for x in 0..n {
        match (inside[x], datum[x]) {
            (false, Some(v)) => values[x] = v,
            (false, None) => return Err(parse_err(0, format!("exterior vertex {x} has no value"))),
            (true, Some(_)) => {
                return Err(parse_err(
                    0,
                    format!("domain vertex {x} has an exterior value"),
                ))
            }
            (true, None) => {}
        }
    }
    DirichletProblem::new(s, &domain, values)
}

pub fn read_problem<R: Read>(mut r: R, n: usize) -> Result<DirichletProblem> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    parse_problem(&text, n)
}

pub fn write_problem<W: Write>(problem: &DirichletProblem, mut w: W) -> Result<()> {
    writeln!(w, "s = {}", sig17(problem.s()))?;
    let ids: Vec<String> = problem.domain().iter().map(|x| x.to_string()).collect();
    writeln!(w, "domain = {}", ids.join(" "))?;
    writeln!(w, "[exterior]")?;
    for x in problem.exterior() {
        writeln!(w, "{x} {}", sig17(problem.datum()[x]))?;
    }
    Ok(())
}

/// CSV with columns vertex_id, u.
pub fn write_solution_csv<W: Write>(u: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "vertex_id,u")?;
    for (x, v) in u.iter().enumerate() {
        writeln!(w, "{x},{}", sig17(*v))?;
    }
    Ok(())
}
