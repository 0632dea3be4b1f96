//! Plain-text and CSV file formats.
//!
//! Numbers are written with Rust's locale-independent formatting. Matrices
//! and states use 17 significant digits, CSV and circuit exports use the
//! shortest representation that parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use qcd_core::challenge::{Family, Target};
use qcd_core::circuit::{Circuit, GateRecord};
use qcd_core::quantum::{GateKind, Matrix, StateVector, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] qcd_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

pub fn read_to_string(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

fn write_entries(out: &mut String, rows: usize, cols: usize, entries: &[C64]) {
    writeln!(out, "dims: {rows} {cols}").unwrap();
    for z in entries {
        writeln!(out, "{:.16e} {:.16e}", z.re, z.im).unwrap();
    }
}

pub fn matrix_to_text(m: &Matrix) -> String {
    let mut out = String::new();
    write_entries(&mut out, m.dim(), m.dim(), m.entries());
    out
}

pub fn state_to_text(s: &StateVector) -> String {
    let mut out = String::new();
    write_entries(&mut out, s.dim(), 1, s.amplitudes());
    out
}

/// Parse the `dims:` text format into `(rows, cols, entries)`.
///
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_entries(text: &str) -> Result<(usize, usize, Vec<C64>), FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (n, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let dims = header.strip_prefix("dims:").ok_or_else(|| parse_err(n, "expected `dims: <rows> <cols>`"))?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|d| d.parse().map_err(|_| parse_err(n, format!("bad dimension `{d}`"))))
        .collect::<Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(n, "expected two dimensions"));
    };
    let mut entries = Vec::with_capacity(rows * cols);
    for (n, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [re, im] = parts[..] else {
            return Err(parse_err(n, "expected `re im`"));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(n, format!("bad number `{s}`")));
        entries.push(C64::new(num(re)?, num(im)?));
    }
    if entries.len() != rows * cols {
        return Err(parse_err(0, format!("expected {} entries, found {}", rows * cols, entries.len())));
    }
    Ok((rows, cols, entries))
}

pub fn parse_matrix(text: &str) -> Result<Matrix, FormatError> {
    let (rows, cols, entries) = parse_entries(text)?;
    if rows != cols {
        return Err(parse_err(1, format!("matrix must be square, got {rows}x{cols}")));
    }
    Ok(Matrix::from_entries(rows, entries)?)
}

pub fn parse_state(text: &str) -> Result<StateVector, FormatError> {
    let (_, cols, entries) = parse_entries(text)?;
    if cols != 1 {
        return Err(parse_err(1, format!("state must have one column, got {cols}")));
    }
    Ok(StateVector::from_amplitudes(entries)?)
}

/// Load a custom challenge target of the given family from disk.
pub fn read_target(path: &Path, family: Family) -> Result<Target, FormatError> {
    let text = read_to_string(path)?;
    Ok(match family {
        Family::Sp => Target::State(parse_state(&text)?),
        Family::Uc => Target::Unitary(parse_matrix(&text)?),
    })
}

/// Line-oriented circuit export: a `#` header with the register size, depth
/// budget and measured wires, then `step kind target control angle` per gate.
pub fn circuit_to_text(c: &Circuit) -> String {
    let measured: Vec<String> =
        c.measured().iter().enumerate().filter(|(_, &m)| m).map(|(q, _)| q.to_string()).collect();
    let mut out = format!("# qubits={} max_depth={} measured={}\n", c.num_qubits(), c.max_depth(), measured.join(","));
    for r in c.records() {
        let control = r.control.map_or("-".to_string(), |q| q.to_string());
        let angle = r.kind.angle().map_or("-".to_string(), |a| a.to_string());
        writeln!(out, "{} {} {} {} {}", r.step, r.kind.name(), r.target, control, angle).unwrap();
    }
    out
}

fn header_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    header.split_whitespace().find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
}

/// Rebuild a circuit from its export. Without a header the register is sized
/// by the highest wire and the budget by the last step.
pub fn parse_circuit(text: &str) -> Result<Circuit, FormatError> {
    let mut header = None;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            header.get_or_insert(h.to_string());
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let [step, kind, target, control, angle] = f[..] else {
            return Err(parse_err(n, "expected `step kind target control angle`"));
        };
        let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(n, format!("bad integer `{s}`")));
        let angle = match angle {
            "-" => None,
            a => Some(a.parse::<f64>().map_err(|_| parse_err(n, format!("bad angle `{a}`")))?),
        };
        let control = match control {
            "-" => None,
            c => Some(int(c)?),
        };
        let kind = GateKind::from_name(kind, angle).map_err(|e| parse_err(n, e.to_string()))?;
        records.push(GateRecord::new(kind, int(target)?, control, int(step)?));
    }
    let header = header.unwrap_or_default();
    let field = |key: &str| -> Result<Option<usize>, FormatError> {
        header_value(&header, key)
            .map(|v| v.parse().map_err(|_| parse_err(1, format!("bad `{key}` in header"))))
            .transpose()
    };
    let widest = records.iter().flat_map(|r| r.wires()).max().map_or(1, |q| q + 1);
    let num_qubits = field("qubits")?.unwrap_or(widest);
    let max_depth = field("max_depth")?.unwrap_or_else(|| records.last().map_or(1, |r| r.step));
    let mut circuit = Circuit::new(num_qubits, max_depth)?;
    for r in records {
        circuit.append(r)?;
    }
    if let Some(list) = header_value(&header, "measured").filter(|l| !l.is_empty()) {
        for q in list.split(',') {
            let q = q.parse().map_err(|_| parse_err(1, format!("bad measured wire `{q}`")))?;
            circuit.mark_measured(q)?;
        }
    }
    Ok(circuit)
}

/// One environment step in an episode log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: u64,
    pub step: usize,
    pub o: f64,
    pub q: f64,
    pub c: f64,
    pub phi: f64,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub depth: usize,
    pub qubits_used: usize,
}

/// Smoothed training metrics after one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub global_step: usize,
    pub episode: usize,
    pub mean_return_100: f64,
    pub mean_qubits_100: f64,
    pub mean_depth_100: f64,
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, FormatError> {
    let text = read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

/// CSV writer that flushes after every row, so partial runs leave usable files.
pub struct RowWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl RowWriter<fs::File> {
    pub fn create(path: &Path) -> Result<Self, FormatError> {
        let file = fs::File::create(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
        Ok(Self { inner: csv::Writer::from_writer(file) })
    }
}

impl<W: Write> RowWriter<W> {
    pub fn from_writer(w: W) -> Self {
        Self { inner: csv::Writer::from_writer(w) }
    }

    pub fn write<T: Serialize>(&mut self, row: &T) -> Result<(), FormatError> {
        self.inner.serialize(row)?;
        self.inner.flush().map_err(|e| FormatError::Csv(e.into()))
    }

    pub fn write_record<I, S>(&mut self, record: I) -> Result<(), FormatError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(record)?;
        self.inner.flush().map_err(|e| FormatError::Csv(e.into()))
    }

    pub fn into_inner(self) -> W {
        self.inner.into_inner().unwrap_or_else(|e| panic!("flushed writer failed: {}", e.error()))
    }
}

/// Final smoothed metrics for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFinal {
    pub seed: u64,
    pub episodes: usize,
    pub mean_return: f64,
    pub mean_qubits: f64,
    pub mean_depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub mean_return: f64,
    pub mean_qubits: f64,
    pub mean_depth: f64,
}

/// Aggregate over seeds, written as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub challenge: String,
    pub agent: String,
    pub steps: usize,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedFinal>,
    pub aggregate: MetricTriple,
    pub ci95: MetricTriple,
}

impl RunSummary {
    pub fn new(challenge: String, agent: String, steps: usize, per_seed: Vec<SeedFinal>) -> Self {
        let stat = |f: fn(&SeedFinal) -> f64| qcd_core::agents::mean_ci95(&per_seed.iter().map(f).collect::<Vec<_>>());
        let (r, rh) = stat(|s| s.mean_return);
        let (q, qh) = stat(|s| s.mean_qubits);
        let (d, dh) = stat(|s| s.mean_depth);
        Self {
            challenge,
            agent,
            steps,
            seeds: per_seed.iter().map(|s| s.seed).collect(),
            per_seed,
            aggregate: MetricTriple { mean_return: r, mean_qubits: q, mean_depth: d },
            ci95: MetricTriple { mean_return: rh, mean_qubits: qh, mean_depth: dh },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}
