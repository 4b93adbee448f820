//! Regular elevation grids and their plain-text representation.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major elevation field in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridTopography<T> {
    rows: usize,
    cols: usize,
    cell_size: T,
    sea_level: T,
    elevation: Vec<T>,
}

impl<T: Real> GridTopography<T> {
    pub fn new(rows: usize, cols: usize, cell_size: T, sea_level: T, elevation: Vec<T>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidConfig(format!("grid must be at least 2x2, got {rows}x{cols}")));
        }
        if elevation.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} elevations for a {rows}x{cols} grid",
                elevation.len()
            )));
        }
        if !(cell_size > T::zero()) || !cell_size.is_finite() {
            return Err(Error::InvalidConfig("cell size must be positive".into()));
        }
        if !sea_level.is_finite() {
            return Err(Error::InvalidConfig("sea level must be finite".into()));
        }
        if let Some(i) = elevation.iter().position(|h| !h.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite elevation at cell {i}")));
        }
        Ok(Self { rows, cols, cell_size, sea_level, elevation })
    }

    pub fn flat(rows: usize, cols: usize, cell_size: T, value: T) -> Result<Self> {
        Self::new(rows, cols, cell_size, T::zero(), vec![value; rows * cols])
    }

    /// Builds a grid by evaluating `f(row, col)` at every cell.
    pub fn from_fn(rows: usize, cols: usize, cell_size: T, sea_level: T, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut elevation = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                elevation.push(f(r, c));
            }
        }
        Self::new(rows, cols, cell_size, sea_level, elevation)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.elevation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elevation.is_empty()
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }

    pub fn sea_level(&self) -> T {
        self.sea_level
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.elevation[self.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        let i = self.index(row, col);
        self.elevation[i] = value;
    }

    pub fn elevations(&self) -> &[T] {
        &self.elevation
    }

    pub(crate) fn elevations_mut(&mut self) -> &mut [T] {
        &mut self.elevation
    }

    #[inline]
    pub fn is_boundary(&self, row: usize, col: usize) -> bool {
        row == 0 || col == 0 || row + 1 == self.rows || col + 1 == self.cols
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{}x{} grid vs {}x{} grid",
                self.rows, self.cols, other.rows, other.cols
            )))
        }
    }

    /// Writes the `rows cols cell_size sea_level` header followed by one line per row.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {} {}", self.rows, self.cols, self.cell_size, self.sea_level)?;
        let mut line = String::new();
        for r in 0..self.rows {
            line.clear();
            for c in 0..self.cols {
                if c > 0 {
                    line.push(' ');
                }
                write!(line, "{}", self.get(r, c)).expect("writing to a String");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()));
        let header = lines.next().ok_or_else(|| Error::Parse("missing grid header".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("grid header needs 4 fields, got `{header}`")));
        }
        let rows: usize = parse(fields[0])?;
        let cols: usize = parse(fields[1])?;
        let cell_size: f64 = parse(fields[2])?;
        let sea_level: f64 = parse(fields[3])?;

        let mut elevation = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing grid row {r}")))??;
            let before = elevation.len();
            for tok in line.split_whitespace() {
                elevation.push(T::lit(parse::<f64>(tok)?));
            }
            if elevation.len() - before != cols {
                return Err(Error::Parse(format!("row {r} has {} values, expected {cols}", elevation.len() - before)));
            }
        }
        Self::new(rows, cols, T::lit(cell_size), T::lit(sea_level), elevation)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_text(text.as_bytes())
    }

    /// Plain (ASCII) portable graymap, scaled between the grid minimum and maximum.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        let (lo, hi) = self
            .elevation
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &h| (lo.min(h), hi.max(h)));
        let span = hi - lo;
        writeln!(out, "P2\n{} {}\n255", self.cols, self.rows)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| {
                    let v = if span > T::zero() { (self.get(r, c) - lo) / span } else { T::zero() };
                    ((v.to_f64_lossy() * 255.0).round() as u8).to_string()
                })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

fn parse<V: std::str::FromStr>(tok: &str) -> Result<V> {
    tok.parse().map_err(|_| Error::Parse(format!("cannot parse `{tok}`")))
}
