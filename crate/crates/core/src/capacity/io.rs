use std::path::Path;

use super::DelayCurve;
use crate::error::Result;
use crate::fmt::num;
use crate::signal::io::write_lines;

pub const CURVE_HEADER: &str = "delay_min,s,avg_energy_j,capacity_bits,gap_bits,converged";

/// Writes all curves into one table, one row per point.
pub fn write_curves(path: &Path, curves: &[DelayCurve]) -> Result<()> {
    let rows = curves.iter().flat_map(|c| {
        c.points.iter().map(move |p| {
            format!(
                "{},{},{},{},{},{}",
                num(c.delay),
                num(p.s),
                num(p.avg_energy),
                num(p.capacity),
                num(p.gap),
                p.converged
            )
        })
    });
    write_lines(path, std::iter::once(CURVE_HEADER.to_owned()).chain(rows))
}

/// Optimal input distributions: `delay_min,s,p_0,...,p_{q-1}`.
pub fn write_distributions(path: &Path, curves: &[DelayCurve]) -> Result<()> {
    let q = curves.iter().flat_map(|c| c.points.first()).map(|p| p.input_distribution.len()).next().unwrap_or(0);
    let header = std::iter::once("delay_min,s".to_owned())
        .chain((0..q).map(|k| format!("p_{k}")))
        .collect::<Vec<_>>()
        .join(",");
    let rows = curves.iter().flat_map(|c| {
        c.points.iter().map(move |p| {
            let mut fields = vec![num(c.delay), num(p.s)];
            fields.extend(p.input_distribution.iter().map(|&v| num(v)));
            fields.join(",")
        })
    });
    write_lines(path, std::iter::once(header).chain(rows))
}
