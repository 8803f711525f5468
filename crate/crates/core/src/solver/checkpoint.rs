//! Plain-text map checkpoints.
//!
//! ```text
//! holo-lab-map 1
//! grid <s_min> <s_max> <n_s> <n_t>
//! degree <k|none>
//! <re> <im> <Z|W>          one line per node, row-major in s
//! ```
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle is lossless.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::CylinderGrid;
use crate::map::MapSample;
use crate::sphere::{Chart, SpherePoint};

const MAGIC: &str = "holo-lab-map 1";

pub fn write_map<W: Write>(u: &MapSample, mut w: W) -> Result<()> {
    let g = &u.grid;
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "grid {:?} {:?} {} {}", g.s_min, g.s_max, g.n_s, g.n_t)?;
    match u.degree {
        Some(k) => writeln!(w, "degree {k}")?,
        None => writeln!(w, "degree none")?,
    }
    for p in &u.values {
        let tag = match p.chart {
            Chart::Z => 'Z',
            Chart::W => 'W',
        };
        writeln!(w, "{:?} {:?} {tag}", p.coord.re, p.coord.im)?;
    }
    Ok(())
}

fn bad(line: usize, what: &str) -> LabError {
    LabError::Checkpoint(format!("line {line}: {what}"))
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| bad(line, what))
}

pub fn read_map<R: Read>(r: R) -> Result<MapSample> {
    let mut lines = BufReader::new(r).lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n + 1, l)),
            Some((n, Err(e))) => Err(bad(n + 1, &e.to_string())),
            None => Err(LabError::Checkpoint(format!("unexpected end of file, expected {what}"))),
        }
    };
    let (n, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(bad(n, "not a holo-lab map checkpoint"));
    }
    let (n, grid_line) = next("grid line")?;
    let mut tok = grid_line.split_whitespace();
    if tok.next() != Some("grid") {
        return Err(bad(n, "expected `grid`"));
    }
    let s_min: f64 = field(tok.next(), n, "s_min")?;
    let s_max: f64 = field(tok.next(), n, "s_max")?;
    let n_s: usize = field(tok.next(), n, "n_s")?;
    let n_t: usize = field(tok.next(), n, "n_t")?;
    let grid = CylinderGrid::new(s_min, s_max, n_s, n_t)?;
    let (n, deg_line) = next("degree line")?;
    let mut tok = deg_line.split_whitespace();
    if tok.next() != Some("degree") {
        return Err(bad(n, "expected `degree`"));
    }
    let degree = match tok.next() {
        Some("none") => None,
        other => Some(field(other, n, "degree")?),
    };
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let (n, l) = next("node line")?;
        let mut tok = l.split_whitespace();
        let re: f64 = field(tok.next(), n, "real part")?;
        let im: f64 = field(tok.next(), n, "imaginary part")?;
        let chart = match tok.next() {
            Some("Z") => Chart::Z,
            Some("W") => Chart::W,
            _ => return Err(bad(n, "chart tag must be Z or W")),
        };
        values.push(SpherePoint::new(Complex64::new(re, im), chart));
    }
    MapSample::new(grid, values, degree)
}

pub fn save_map(u: &MapSample, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_map(u, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_map(path: &Path) -> Result<MapSample> {
    read_map(std::fs::File::open(path)?)
}
