//! CSV trace files.
//!
//! Two column layouts are accepted: the measurement frame `t,v_total,v_series`
//! and the device frame `t,v,i`. Values are SI; lines starting with `#` are
//! ignored.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt::num;
use crate::signal::segment::{Segment, SegmentKind};
use crate::signal::trace::{MeasurementRecord, VITrace};

#[derive(Debug, Clone, PartialEq)]
pub enum TraceFile {
    Measurement(Vec<MeasurementRecord>),
    Device(VITrace),
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file))
}

fn parse_row(path: &Path, rec: &csv::StringRecord, width: usize) -> Result<Vec<f64>> {
    let line = rec.position().map_or(0, |p| p.line());
    if rec.len() != width {
        return Err(Error::format(path, format!("line {line}: expected {width} fields, got {}", rec.len())));
    }
    rec.iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::format(path, format!("line {line}: bad number '{f}'")))
        })
        .collect()
}

/// Reads a trace in either frame, chosen by the header.
pub fn read_trace(path: &Path) -> Result<TraceFile> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.map_err(Error::from).and_then(|r| parse_row(path, &r, 3)))
        .collect::<Result<_>>()?;
    match header.as_slice() {
        ["t", "v_total", "v_series"] => Ok(TraceFile::Measurement(
            rows.into_iter().map(|r| MeasurementRecord { t: r[0], v_total: r[1], v_series: r[2] }).collect(),
        )),
        ["t", "v", "i"] => {
            let (mut t, mut v, mut i) = (Vec::new(), Vec::new(), Vec::new());
            for r in rows {
                t.push(r[0]);
                v.push(r[1]);
                i.push(r[2]);
            }
            VITrace::new(t, v, i)
                .map(TraceFile::Device)
                .map_err(|e| Error::format(path, e.to_string()))
        }
        other => Err(Error::format(path, format!("unrecognised trace header {other:?}"))),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

pub(crate) fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> Result<()> {
    let mut w = create(path)?;
    for line in lines {
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_device_trace(path: &Path, trace: &VITrace) -> Result<()> {
    let rows = (0..trace.len()).map(|k| format!("{},{},{}", num(trace.t()[k]), num(trace.v()[k]), num(trace.i()[k])));
    write_lines(path, std::iter::once("t,v,i".to_owned()).chain(rows))
}

pub fn write_measurement_trace(path: &Path, records: &[MeasurementRecord]) -> Result<()> {
    let rows = records.iter().map(|r| format!("{},{},{}", num(r.t), num(r.v_total), num(r.v_series)));
    write_lines(path, std::iter::once("t,v_total,v_series".to_owned()).chain(rows))
}

/// Writes a drive waveform as `t,v`.
pub fn write_waveform(path: &Path, t: &[f64], v: &[f64]) -> Result<()> {
    let rows = t.iter().zip(v).map(|(t, v)| format!("{},{}", num(*t), num(*v)));
    write_lines(path, std::iter::once("t,v".to_owned()).chain(rows))
}

pub fn write_segments(path: &Path, segments: &[Segment]) -> Result<()> {
    let rows = segments.iter().map(|s| format!("{},{},{}", s.kind, s.start, s.end));
    write_lines(path, std::iter::once("segment,start_index,end_index".to_owned()).chain(rows))
}

pub fn read_segments(path: &Path) -> Result<Vec<Segment>> {
    let mut rdr = reader(path)?;
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["segment", "start_index", "end_index"] {
        return Err(Error::format(path, "expected header segment,start_index,end_index"));
    }
    rdr.records()
        .map(|r| {
            let r = r?;
            let line = r.position().map_or(0, |p| p.line());
            let bad = |m: String| Error::format(path, format!("line {line}: {m}"));
            if r.len() != 3 {
                return Err(bad(format!("expected 3 fields, got {}", r.len())));
            }
            let kind: SegmentKind = r[0].parse().map_err(|e: Error| bad(e.to_string()))?;
            let start = r[1].parse().map_err(|_| bad(format!("bad index '{}'", &r[1])))?;
            let end = r[2].parse().map_err(|_| bad(format!("bad index '{}'", &r[2])))?;
            if end < start {
                return Err(bad("end_index before start_index".into()));
            }
            Ok(Segment { kind, start, end })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_trace_round_trip_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tr.csv");
        let tr = VITrace::new(vec![0.0, 1e-5, 2e-5], vec![0.1, -0.2, 1.0 / 3.0], vec![1e-7, 2.5e-9, -3e-12]).unwrap();
        write_device_trace(&p, &tr).unwrap();
        let mut text = std::fs::read_to_string(&p).unwrap();
        text.insert_str(0, "# scope export\n");
        std::fs::write(&p, text).unwrap();
        assert_eq!(read_trace(&p).unwrap(), TraceFile::Device(tr));
    }

    #[test]
    fn measurement_header_detected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(&p, "t,v_total,v_series\n0,1.0,0.5\n1e-5,0.9,0.45\n").unwrap();
        match read_trace(&p).unwrap() {
            TraceFile::Measurement(r) => assert_eq!(r[1].v_series, 0.45),
            other => panic!("{other:?}"),
        }
        std::fs::write(&p, "time,a,b\n0,1,2\n").unwrap();
        assert!(read_trace(&p).is_err());
        std::fs::write(&p, "t,v,i\n0,1,nan\n").unwrap();
        assert!(read_trace(&p).is_err());
    }

    #[test]
    fn segments_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("seg.csv");
        let segs = vec![
            Segment { kind: SegmentKind::Reset, start: 0, end: 300 },
            Segment { kind: SegmentKind::ReadAfterSet(0), start: 300, end: 400 },
        ];
        write_segments(&p, &segs).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap().lines().next(), Some("segment,start_index,end_index"));
        assert_eq!(read_segments(&p).unwrap(), segs);
    }
}
