//! Plain-text constellation interchange format.
//!
//! ```text
//! # <name> <M> <bits> <detection_mode>
//! xI xQ yI yQ        (M lines, row index = point label)
//! ```
//!
//! Values are written with 17 significant digits, so a write/read cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Constellation, DetectionMode, Symbol4D};
use crate::error::{Error, Result};

pub fn format_constellation(c: &Constellation) -> String {
    let mut out = String::with_capacity(80 * (c.len() + 1));
    let _ = writeln!(
        out,
        "# {} {} {:.16e} {}",
        c.name(),
        c.len(),
        c.bits_per_symbol(),
        c.detection_mode()
    );
    for p in c.points() {
        let [a, b, x, y] = p.coords();
        let _ = writeln!(out, "{a:.16e} {b:.16e} {x:.16e} {y:.16e}");
    }
    out
}

pub fn parse_constellation(text: &str) -> Result<Constellation> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header.strip_prefix('#').ok_or(Error::Parse {
        line: hline,
        msg: "header must start with `#`".into(),
    })?;
    let fields: Vec<&str> = header.trim().rsplitn(4, char::is_whitespace).collect();
    if fields.len() != 4 {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be `# name M bits detection_mode`".into(),
        });
    }
    let (mode, bits, count, name) = (fields[0], fields[1], fields[2], fields[3].trim());
    let perr = |msg: String| Error::Parse { line: hline, msg };
    let mode: DetectionMode = mode.parse().map_err(|e: Error| perr(e.to_string()))?;
    let count: usize = count
        .parse()
        .map_err(|_| perr(format!("bad point count `{count}`")))?;
    let bits: f64 = bits
        .parse()
        .map_err(|_| perr(format!("bad bits per symbol `{bits}`")))?;

    let mut points = Vec::with_capacity(count);
    for (ln, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: ln,
                msg: format!("{e}"),
            })?;
        let coords: [f64; 4] = vals.try_into().map_err(|_| Error::Parse {
            line: ln,
            msg: "expected four values `xI xQ yI yQ`".into(),
        })?;
        points.push(Symbol4D::from_coords(coords));
    }
    if points.len() != count {
        return Err(perr(format!(
            "header declares {count} points, file has {}",
            points.len()
        )));
    }
    if (bits - (count as f64).log2()).abs() > 1e-9 {
        return Err(perr(format!("bits {bits} inconsistent with M = {count}")));
    }
    Constellation::with_mode(name, points, mode)
}

pub fn write_constellation(c: &Constellation, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_constellation(c)).map_err(|e| Error::io(path, e))
}

pub fn read_constellation(path: impl AsRef<Path>) -> Result<Constellation> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_constellation(&text)
}
