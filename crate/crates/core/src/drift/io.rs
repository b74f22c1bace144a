//! Drift sample interchange, retention series and channel matrix files.

use std::fs::File;
use std::path::Path;

use crate::drift::{make_grid, DriftChannelMatrix, DriftSample, RetentionSeries};
use crate::error::{Error, Result, RowError};
use crate::fmt::{exact, num};
use crate::signal::io::write_lines;

pub const DRIFT_SAMPLE_HEADER: [&str; 3] = ["r_init_ohms", "delay_min", "r_final_ohms"];

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

/// Outcome of validating a drift sample file row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftIngest {
    pub samples: Vec<DriftSample>,
    pub rejected: Vec<RowError>,
}

/// Parses every row, collecting malformed ones instead of failing.
///
/// Fails only on I/O errors or a wrong header.
pub fn validate_drift_samples(path: &Path) -> Result<DriftIngest> {
    let mut rdr = open(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != DRIFT_SAMPLE_HEADER {
        return Err(Error::format(path, format!("expected header {}, got {}", DRIFT_SAMPLE_HEADER.join(","), header.join(","))));
    }
    let mut samples = Vec::new();
    let mut rejected = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            rejected.push(RowError { line, reason: format!("expected 3 fields, got {}", rec.len()) });
            continue;
        }
        let fields: Option<Vec<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        let Some(f) = fields else {
            rejected.push(RowError { line, reason: "non-numeric field".into() });
            continue;
        };
        let s = DriftSample { r_init: f[0], delay: f[1], r_final: f[2] };
        match s.validate() {
            Ok(()) => samples.push(s),
            Err(e) => rejected.push(RowError { line, reason: e.to_string() }),
        }
    }
    Ok(DriftIngest { samples, rejected })
}

/// Reads a drift sample file; any malformed row fails the whole read and
/// the error lists every offending line.
pub fn ingest_drift_samples(path: &Path) -> Result<Vec<DriftSample>> {
    let DriftIngest { samples, rejected } = validate_drift_samples(path)?;
    match rejected.first().cloned() {
        Some(first) => Err(Error::MalformedRows { path: path.to_owned(), count: rejected.len(), first, rows: rejected }),
        None => Ok(samples),
    }
}

pub fn write_drift_samples(path: &Path, samples: &[DriftSample]) -> Result<()> {
    let rows = samples.iter().map(|s| format!("{},{},{}", num(s.r_init), num(s.delay), num(s.r_final)));
    write_lines(path, std::iter::once(DRIFT_SAMPLE_HEADER.join(",")).chain(rows))
}

pub fn write_retention_series(path: &Path, series: &RetentionSeries) -> Result<()> {
    let rows = series.t().iter().zip(series.r()).map(|(t, r)| format!("{},{}", num(*t), num(*r)));
    write_lines(path, std::iter::once("t_min,r_ohms".to_owned()).chain(rows))
}

pub fn read_retention_series(path: &Path) -> Result<RetentionSeries> {
    let mut rdr = open(path)?;
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["t_min", "r_ohms"] {
        return Err(Error::format(path, "expected header t_min,r_ohms"));
    }
    let (mut t, mut r) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = || Error::format(path, format!("line {line}: expected two numbers"));
        if rec.len() != 2 {
            return Err(bad());
        }
        t.push(rec[0].parse().map_err(|_| bad())?);
        r.push(rec[1].parse().map_err(|_| bad())?);
    }
    RetentionSeries::new(t, r).map_err(|e| Error::format(path, e.to_string()))
}

/// Writes a channel matrix: a `key,value` header block, one `row,...` line
/// per input symbol and a final `costs,...` line. Floats carry 17
/// significant digits.
pub fn write_channel(path: &Path, m: &DriftChannelMatrix) -> Result<()> {
    let mut lines = vec![
        "# drift channel matrix".to_owned(),
        format!("delay_min,{}", exact(m.delay)),
        format!("input_lo,{}", exact(m.input_grid.lo())),
        format!("input_hi,{}", exact(m.input_grid.hi())),
        format!("input_q,{}", m.q_in()),
        format!("output_lo,{}", exact(m.output_grid.lo())),
        format!("output_hi,{}", exact(m.output_grid.hi())),
        format!("output_q,{}", m.q_out()),
        format!("samples_per_input,{}", m.samples_per_input),
        format!("seed,{}", m.seed.map(|s| s.to_string()).unwrap_or_default()),
    ];
    for x in 0..m.q_in() {
        let row: Vec<String> = m.row(x).iter().map(|&p| exact(p)).collect();
        lines.push(format!("row,{}", row.join(",")));
    }
    let costs: Vec<String> = m.costs.iter().map(|&c| exact(c)).collect();
    lines.push(format!("costs,{}", costs.join(",")));
    write_lines(path, lines)
}

pub fn read_channel(path: &Path) -> Result<DriftChannelMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: &str| Error::format(path, format!("line {line}: {msg}"));
    let mut header = std::collections::BTreeMap::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut costs: Option<Vec<f64>> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let (key, rest) = raw.split_once(',').ok_or_else(|| bad(line, "expected key,value"))?;
        match key {
            "row" | "costs" => {
                let vals: Vec<f64> = rest
                    .split(',')
                    .map(|f| f.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(line, "non-numeric entry"))?;
                if key == "row" {
                    rows.push(vals);
                } else {
                    costs = Some(vals);
                }
            }
            _ => {
                header.insert(key.to_owned(), (line, rest.trim().to_owned()));
            }
        }
    }
    let get = |k: &str| header.get(k).ok_or_else(|| Error::format(path, format!("missing header key {k}")));
    let float = |k: &str| -> Result<f64> {
        let (line, v) = get(k)?;
        v.parse().map_err(|_| bad(*line, &format!("bad value for {k}")))
    };
    let count = |k: &str| -> Result<usize> {
        let (line, v) = get(k)?;
        v.parse().map_err(|_| bad(*line, &format!("bad value for {k}")))
    };
    let seed = match get("seed")? {
        (_, s) if s.is_empty() => None,
        (line, s) => Some(s.parse().map_err(|_| bad(*line, "bad seed"))?),
    };
    let input_grid = make_grid(float("input_lo")?, float("input_hi")?, count("input_q")?)?;
    let output_grid = make_grid(float("output_lo")?, float("output_hi")?, count("output_q")?)?;
    if rows.len() != input_grid.q() || rows.iter().any(|r| r.len() != output_grid.q()) {
        return Err(Error::format(path, "matrix shape does not match the grids"));
    }
    let m = DriftChannelMatrix {
        delay: float("delay_min")?,
        input_grid,
        output_grid,
        p: rows.concat(),
        costs: costs.ok_or_else(|| Error::format(path, "missing costs line"))?,
        samples_per_input: count("samples_per_input")?,
        seed,
    };
    m.validate().map_err(|e| Error::format(path, e.to_string()))?;
    Ok(m)
}
