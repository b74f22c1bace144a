use crate::error::{invalid, Result};

/// `q` equal-width bins on `[lo, hi]`, each represented by its centre.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantisationGrid {
    lo: f64,
    hi: f64,
    q: usize,
    centroids: Vec<f64>,
}

impl QuantisationGrid {
    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.q as f64
    }

    /// Bin `k` as `[lo_k, hi_k)`; the last bin also contains `hi`.
    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + k as f64 * w, self.lo + (k + 1) as f64 * w)
    }

    /// Bin index for `r`, clamping out-of-range values to the end bins.
    pub fn index(&self, r: f64) -> usize {
        let pos = ((r - self.lo) / self.width()).floor();
        if pos <= 0.0 {
            0
        } else {
            (pos as usize).min(self.q - 1)
        }
    }
}

pub fn make_grid(lo: f64, hi: f64, q: usize) -> Result<QuantisationGrid> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("grid bounds must be finite with lo < hi, got [{lo}, {hi}]")));
    }
    if q < 2 {
        return Err(invalid(format!("grid needs q >= 2 bins, got {q}")));
    }
    let w = (hi - lo) / q as f64;
    let centroids = (0..q).map(|k| lo + (k as f64 + 0.5) * w).collect();
    Ok(QuantisationGrid { lo, hi, q, centroids })
}

pub fn quantise_value(r: f64, grid: &QuantisationGrid) -> Result<usize> {
    if !r.is_finite() {
        return Err(invalid(format!("cannot quantise non-finite value {r}")));
    }
    Ok(grid.index(r))
}
