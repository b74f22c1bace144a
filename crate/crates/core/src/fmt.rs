/// Shortest text that round-trips to the same `f64`.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Scientific notation with 17 significant digits.
pub(crate) fn exact(x: f64) -> String {
    format!("{x:.16e}")
}
