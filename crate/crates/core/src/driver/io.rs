//! Snapshot and monitor files.
//!
//! A snapshot file is a sequence of records. Each record is a text header
//!
//! ```text
//! NEMFLD 1
//! dim 2
//! n 48
//! k 21
//! components 3
//! name d
//! time 0e0
//! end
//! ```
//!
//! followed by `components * n^dim` little-endian `f64` samples, component
//! by component, in row-major grid order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::diagnostics::EnergyReport;
use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusGrid};

pub const SNAPSHOT_MAGIC: &str = "NEMFLD";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub dim: usize,
    pub n: usize,
    pub cutoff: f64,
    pub name: String,
    pub time: f64,
    /// Physical samples, one vector per component.
    pub data: Vec<Vec<f64>>,
}

impl SnapshotRecord {
    pub fn from_field(name: &str, time: f64, f: &SpectralField) -> Self {
        let g = f.grid();
        Self {
            dim: g.dim(),
            n: g.n(),
            cutoff: f.cutoff(),
            name: name.to_string(),
            time,
            data: f.to_physical(),
        }
    }

    pub fn to_field(&self) -> Result<SpectralField> {
        let grid = TorusGrid::new(self.dim, self.n)?;
        SpectralField::to_spectral(grid, &self.data, self.cutoff)
    }
}

/// `u`, `d` and `ddot` of a state as three records.
pub fn state_records(s: &State) -> Vec<SnapshotRecord> {
    vec![
        SnapshotRecord::from_field("u", s.t, &s.u),
        SnapshotRecord::from_field("d", s.t, &s.d),
        SnapshotRecord::from_field("ddot", s.t, &s.ddot),
    ]
}

/// Rebuilds a state from the records written by [`write_state`].
pub fn state_from_records(records: &[SnapshotRecord]) -> Result<State> {
    let find = |name: &str| {
        records
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::FormatVersionMismatch(format!("snapshot has no `{name}` record")))
    };
    let (u, d, w) = (find("u")?, find("d")?, find("ddot")?);
    State::new(u.time, u.to_field()?, d.to_field()?, w.to_field()?)
}

pub fn write_snapshot(path: &Path, records: &[SnapshotRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in records {
        writeln!(out, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
        writeln!(out, "dim {}", r.dim)?;
        writeln!(out, "n {}", r.n)?;
        writeln!(out, "k {:e}", r.cutoff)?;
        writeln!(out, "components {}", r.data.len())?;
        writeln!(out, "name {}", r.name)?;
        writeln!(out, "time {:e}", r.time)?;
        writeln!(out, "end")?;
        for c in &r.data {
            for v in c {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_state(path: &Path, s: &State) -> Result<()> {
    write_snapshot(path, &state_records(s))
}

pub fn read_state(path: &Path) -> Result<State> {
    state_from_records(&read_snapshot(path)?)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::FormatVersionMismatch(msg.into())
}

fn header_value<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| bad(format!("expected `{key}`, found `{line}`")))
}

fn parse<T: std::str::FromStr>(line: &str, key: &str) -> Result<T> {
    header_value(line, key)?
        .parse()
        .map_err(|_| bad(format!("unparsable `{key}` in `{line}`")))
}

/// Reads one header line, `None` at a clean end of file.
fn read_line(r: &mut impl BufRead) -> Result<Option<String>> {
    let mut buf = Vec::new();
    let n = r.read_until(b'\n', &mut buf)?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() != Some(&b'\n') {
        return Err(bad("truncated header"));
    }
    buf.pop();
    String::from_utf8(buf).map(Some).map_err(|_| bad("header is not text"))
}

fn required_line(r: &mut impl BufRead) -> Result<String> {
    read_line(r)?.ok_or_else(|| bad("truncated header"))
}

pub fn read_snapshot(path: &Path) -> Result<Vec<SnapshotRecord>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    while let Some(first) = read_line(&mut r)? {
        let version: u32 = parse(&first, SNAPSHOT_MAGIC)?;
        if version != SNAPSHOT_VERSION {
            return Err(bad(format!("version {version}, expected {SNAPSHOT_VERSION}")));
        }
        let dim: usize = parse(&required_line(&mut r)?, "dim")?;
        let n: usize = parse(&required_line(&mut r)?, "n")?;
        let cutoff: f64 = parse(&required_line(&mut r)?, "k")?;
        let ncomp: usize = parse(&required_line(&mut r)?, "components")?;
        let name = header_value(&required_line(&mut r)?, "name")?.to_string();
        let time: f64 = parse(&required_line(&mut r)?, "time")?;
        if required_line(&mut r)? != "end" {
            return Err(bad("missing `end` after header"));
        }
        if !(1..=3).contains(&dim) || n == 0 || ncomp == 0 || ncomp > 16 {
            return Err(bad(format!("implausible header: dim {dim}, n {n}, components {ncomp}")));
        }
        let len = n
            .checked_pow(dim as u32)
            .filter(|&l| l <= 1 << 28)
            .ok_or_else(|| bad(format!("grid {n}^{dim} too large")))?;
        let mut data = Vec::with_capacity(ncomp);
        let mut bytes = vec![0u8; 8 * len];
        for _ in 0..ncomp {
            r.read_exact(&mut bytes)?;
            data.push(
                bytes
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                    .collect(),
            );
        }
        records.push(SnapshotRecord {
            dim,
            n,
            cutoff,
            name,
            time,
            data,
        });
    }
    if records.is_empty() {
        return Err(bad("empty snapshot file"));
    }
    Ok(records)
}

/// CSV text of a monitor series: a header row, then one row per sample with
/// 17 significant digits.
pub fn series_to_csv(series: &[EnergyReport]) -> String {
    let mut out = EnergyReport::COLUMNS.join(",");
    out.push('\n');
    for r in series {
        let row: Vec<String> = r.values().iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_series(path: &Path, series: &[EnergyReport]) -> Result<()> {
    std::fs::write(path, series_to_csv(series))?;
    Ok(())
}

pub fn series_from_csv(text: &str) -> Result<Vec<EnergyReport>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty monitor file"))?;
    if header != EnergyReport::COLUMNS.join(",") {
        return Err(bad("unexpected monitor header"));
    }
    lines
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, line)| {
            let v = line
                .split(',')
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(format!("row {}: unparsable value", i + 1)))?;
            EnergyReport::from_values(&v)
        })
        .collect()
}

pub fn read_series(path: &Path) -> Result<Vec<EnergyReport>> {
    series_from_csv(&std::fs::read_to_string(path)?)
}
