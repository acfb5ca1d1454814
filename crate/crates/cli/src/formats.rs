//! On-disk formats: binary snapshots and Wigner grids, CSV series and
//! whitespace-separated text tables.
//!
//! Floats in text are written with Rust's shortest round-trip formatting,
//! so every file is a deterministic function of the values it holds.

use std::fmt::Write as _;

use khps_core::laser::FieldCache;
use khps_core::observables::{SeriesRecord, CSV_COLUMNS};
use khps_core::phasespace::{PhasePortrait, WignerGrid, WignerWindow};
use khps_core::{Complex, Frame, SpatialGrid, WaveFunction};

use crate::error::{Failure, Result};

pub const SNAPSHOT_MAGIC: &str = "KHPS1";
pub const WIGNER_MAGIC: &str = "KHPSW1";

fn bad(msg: impl Into<String>) -> Failure {
    Failure::new("io", msg)
}

/// A state read back from a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub state: WaveFunction,
    pub t: f64,
}

pub fn encode_snapshot(psi: &WaveFunction, t: f64) -> Vec<u8> {
    let g = psi.grid();
    let mut out = format!(
        "{SNAPSHOT_MAGIC} {} {} {} {} {}\n",
        g.len(),
        g.x_min(),
        g.x_max(),
        t,
        psi.frame().as_str()
    )
    .into_bytes();
    out.reserve(16 * g.len());
    for z in psi.amplitudes() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn split_header<'a>(bytes: &'a [u8], magic: &str) -> Result<(Vec<&'a str>, &'a [u8])> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad(format!("missing {magic} header line")))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&magic) {
        return Err(bad(format!("expected {magic} header, found `{header}`")));
    }
    Ok((fields, &bytes[nl + 1..]))
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| bad(format!("bad {what} `{s}` in header")))
}

fn read_f64s(payload: &[u8], count: usize) -> Result<Vec<f64>> {
    if payload.len() != 8 * count {
        return Err(bad(format!(
            "payload holds {} bytes, expected {} for {count} values",
            payload.len(),
            8 * count
        )));
    }
    Ok(payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

fn parse_frame(s: &str) -> Result<Frame> {
    s.parse::<Frame>().map_err(|e| bad(e.to_string()))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SnapshotFile> {
    let (h, payload) = split_header(bytes, SNAPSHOT_MAGIC)?;
    if h.len() != 6 {
        return Err(bad(format!("snapshot header has {} fields, expected 6", h.len())));
    }
    let n: usize = num(h[1], "point count")?;
    let grid = SpatialGrid::new(num(h[2], "x_min")?, num(h[3], "x_max")?, n).map_err(|e| bad(e.to_string()))?;
    let t: f64 = num(h[4], "time")?;
    let frame = parse_frame(h[5])?;
    let v = read_f64s(payload, 2 * n)?;
    let amps = v.chunks_exact(2).map(|c| Complex::new(c[0], c[1])).collect();
    let state = WaveFunction::new(grid, amps, frame).map_err(|e| bad(e.to_string()))?;
    Ok(SnapshotFile { state, t })
}

pub fn encode_wigner(w: &WignerGrid) -> Vec<u8> {
    let win = &w.window;
    let mut out = format!(
        "{WIGNER_MAGIC} {} {} {} {} {} {} {} {}\n",
        win.n_x,
        win.n_p,
        win.x_min,
        win.x_max,
        win.p_min,
        win.p_max,
        w.t,
        w.frame.as_str()
    )
    .into_bytes();
    out.reserve(8 * w.values.len());
    for v in &w.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// The correlation range is not stored; the decoded window carries the
/// default `xi_max`.
pub fn decode_wigner(bytes: &[u8]) -> Result<WignerGrid> {
    let (h, payload) = split_header(bytes, WIGNER_MAGIC)?;
    if h.len() != 9 {
        return Err(bad(format!("Wigner header has {} fields, expected 9", h.len())));
    }
    let window = WignerWindow {
        n_x: num(h[1], "n_x")?,
        n_p: num(h[2], "n_p")?,
        x_min: num(h[3], "x_min")?,
        x_max: num(h[4], "x_max")?,
        p_min: num(h[5], "p_min")?,
        p_max: num(h[6], "p_max")?,
        ..WignerWindow::default()
    };
    let t = num(h[7], "time")?;
    let frame = parse_frame(h[8])?;
    let values = read_f64s(payload, window.n_x * window.n_p)?;
    Ok(WignerGrid {
        window,
        values,
        t,
        frame,
        max_imag: 0.0,
    })
}

/// `# a b` header followed by one row per pair.
pub fn two_column(names: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = format!("# {} {}\n", names.0, names.1);
    for (a, b) in rows {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

/// Parses a two-column table, skipping `#` comments and blank lines.
pub fn parse_two_column(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(bad(format!("expected two columns, got `{line}`")));
        }
        out.push((num(cols[0], "value")?, num(cols[1], "value")?));
    }
    Ok(out)
}

/// `t ε A α` every `stride` cache nodes, always including the last node.
pub fn field_table(cache: &FieldCache, stride: usize) -> String {
    let stride = stride.max(1);
    let mut s = String::from("# t eps A alpha\n");
    let last = cache.len() - 1;
    for k in (0..cache.len()).filter(|&k| k % stride == 0 || k == last) {
        let (t, f) = cache.node(k);
        let _ = writeln!(s, "{t} {} {} {}", f.eps, f.a, f.alpha);
    }
    s
}

pub fn series_csv(records: &[SeriesRecord]) -> String {
    let mut s = CSV_COLUMNS.join(",");
    s.push('\n');
    for r in records {
        let row: Vec<String> = r.values().iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Parses a series CSV back into rows of the fourteen columns.
pub fn parse_series_csv(text: &str) -> Result<Vec<[f64; 14]>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty series file"))?;
    if header != CSV_COLUMNS.join(",") {
        return Err(bad(format!("unexpected series header `{header}`")));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            if cols.len() != 14 {
                return Err(bad(format!("row has {} columns: `{l}`", cols.len())));
            }
            let mut row = [0.0; 14];
            for (dst, c) in row.iter_mut().zip(cols) {
                *dst = num(c, "series value")?;
            }
            Ok(row)
        })
        .collect()
}

/// Equienergy loops as `x p` blocks separated by blank lines, each
/// introduced by an `# E = …` comment.
pub fn portrait_table(portrait: &PhasePortrait) -> String {
    let mut s = format!("# x p\n# E_sep = {}\n", portrait.e_sep);
    for c in &portrait.curves {
        for (b, branch) in c.branches.iter().enumerate() {
            let _ = writeln!(s, "\n# E = {} branch {b}", c.energy);
            for &(x, p) in branch {
                let _ = writeln!(s, "{x} {p}");
            }
        }
    }
    s
}
