//! CSV and JSON writers, and the reference-distribution reader.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use qwalk::analysis::Distribution;
use qwalk::statespace::{Dimensionality, Lattice, Position};
use serde::Serialize;

use crate::config::invalid;

/// Probabilities below this print as zero.
const PRINT_FLOOR: f64 = 1e-15;

/// 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn fmt_prob(p: f64) -> String {
    fmt_num(if p.abs() < PRINT_FLOOR { 0.0 } else { p })
}

/// `x,y,p` (or `x,p`) rows in site order: `x` outer, `y` inner.
pub fn distribution_csv(p: &Distribution) -> String {
    let mut s = String::with_capacity(32 * p.probabilities().len());
    match p.dimensionality() {
        Dimensionality::One => s.push_str("x,p\n"),
        Dimensionality::Two => s.push_str("x,y,p\n"),
    }
    for (pos, v) in p.iter() {
        match pos {
            Position::One(x) => writeln!(s, "{x},{}", fmt_prob(v)),
            Position::Two(x, y) => writeln!(s, "{x},{y},{}", fmt_prob(v)),
        }
        .expect("writing to a String");
    }
    s
}

pub fn write_distribution(path: &Path, p: &Distribution) -> Result<()> {
    fs::write(path, distribution_csv(p)).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Reads a distribution CSV in the format written by [`distribution_csv`].
/// Weights are rescaled to unit sum; missing sites count as zero.
pub fn read_distribution(path: &Path) -> Result<Distribution> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let bad = |line: usize, msg: &str| invalid("reference", format!("{}:{line}: {msg}", path.display()));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let dim = match lines.next().map(|(_, h)| h.trim()) {
        Some("x,p") => Dimensionality::One,
        Some("x,y,p") => Dimensionality::Two,
        _ => return Err(bad(1, "header must be `x,p` or `x,y,p`")),
    };
    let mut rows = Vec::new();
    let mut reach = 0u64;
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dim.axes() + 1 {
            return Err(bad(i + 1, "wrong number of fields"));
        }
        let coords: Vec<i64> = fields[..dim.axes()]
            .iter()
            .map(|f| f.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(i + 1, "bad coordinate"))?;
        let v: f64 = fields[dim.axes()]
            .parse()
            .map_err(|_| bad(i + 1, "bad probability"))?;
        let pos = match dim {
            Dimensionality::One => Position::One(coords[0]),
            Dimensionality::Two => Position::Two(coords[0], coords[1]),
        };
        reach = reach.max(pos.max_abs());
        rows.push((pos, v));
    }
    let lattice = Lattice::new(dim, reach.max(1) as usize);
    let mut weights = vec![0.0; lattice.num_sites()];
    for (pos, v) in rows {
        weights[lattice.site_index(pos)?] += v;
    }
    Distribution::normalized(lattice, weights).map_err(|e| invalid("reference", e))
}
