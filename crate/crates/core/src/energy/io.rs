use std::fs::File;
use std::path::Path;

use crate::energy::{EnergyCostModel, EnergyObservation, FitDiagnostics};
use crate::error::{Error, Result, RowError};
use crate::fmt::num;
use crate::signal::io::write_lines;

/// Reads `r_ohms,e_joules` rows; malformed rows are reported together.
pub fn read_observations(path: &Path) -> Result<Vec<EnergyObservation>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["r_ohms", "e_joules"] {
        return Err(Error::format(path, "expected header r_ohms,e_joules"));
    }
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parsed = (rec.len() == 2)
            .then(|| Some(EnergyObservation { r: rec[0].parse().ok()?, e: rec[1].parse().ok()? }))
            .flatten();
        match parsed {
            Some(o) => match o.validate() {
                Ok(()) => out.push(o),
                Err(e) => bad.push(RowError { line, reason: e.to_string() }),
            },
            None => bad.push(RowError { line, reason: "expected two numeric fields".into() }),
        }
    }
    if let Some(first) = bad.first().cloned() {
        return Err(Error::MalformedRows { path: path.to_owned(), count: bad.len(), first, rows: bad });
    }
    Ok(out)
}

pub fn write_observations(path: &Path, obs: &[EnergyObservation]) -> Result<()> {
    let rows = obs.iter().map(|o| format!("{},{}", num(o.r), num(o.e)));
    write_lines(path, std::iter::once("r_ohms,e_joules".to_owned()).chain(rows))
}

/// Per-point residual table: `r_ohms,e_joules,e_model_joules,residual_joules`.
pub fn write_residuals(path: &Path, obs: &[EnergyObservation], model: &EnergyCostModel) -> Result<()> {
    let rows = obs.iter().map(|o| {
        let m = model.cost(o.r);
        format!("{},{},{},{}", num(o.r), num(o.e), num(m), num(o.e - m))
    });
    write_lines(path, std::iter::once("r_ohms,e_joules,e_model_joules,residual_joules".to_owned()).chain(rows))
}

/// Summary table `key,value` with `a`, `b`, `rss`, `iterations`, `n`.
pub fn write_fit_summary(path: &Path, model: &EnergyCostModel, diag: &FitDiagnostics) -> Result<()> {
    let lines = [
        "key,value".to_owned(),
        format!("a,{}", num(model.a)),
        format!("b,{}", num(model.b)),
        format!("rss,{}", num(diag.rss)),
        format!("iterations,{}", diag.iterations),
        format!("n,{}", diag.residuals.len()),
    ];
    write_lines(path, lines)
}
