use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bin width of red-fraction histograms.
pub const FR_BIN_WIDTH: f64 = 1.0 / 30.0;
/// Bin width of polarization histograms for ordinary slots.
pub const MU_BIN_WIDTH: f64 = 1e-3;
/// Bin width of polarization histograms for long slots.
pub const MU_BIN_WIDTH_LONG: f64 = 5e-4;

/// Fixed-width histogram normalized as a probability density:
/// `sum(density) * width == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram<T> {
    pub width: T,
    pub lo: T,
    pub hi: T,
    pub counts: Vec<u64>,
    pub density: Vec<T>,
}

impl<T: Real> Histogram<T> {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Left edge of bin `b`.
    pub fn bin_lo(&self, b: usize) -> T {
        self.lo + self.width * T::from_usize_lossy(b)
    }

    /// `sum(density) * width`.
    pub fn mass(&self) -> T {
        self.density.iter().copied().sum::<T>() * self.width
    }
}

/// Number of bins covering `[lo, hi]`; a span that is an integer multiple
/// of the width up to rounding gets exactly that many bins.
fn bin_count<T: Real>(width: T, lo: T, hi: T) -> usize {
    let ratio = ((hi - lo) / width).to_f64().unwrap_or(f64::NAN);
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    (n as usize).max(1)
}

/// Density histogram over `[lo, hi]`. Samples equal to `hi` go into the last
/// bin; samples outside the range by more than rounding are rejected.
pub fn histogram<T: Real>(samples: &[T], bin_width: T, range: (T, T)) -> Result<Histogram<T>> {
    let (lo, hi) = range;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(bin_width > T::zero()) || !bin_width.is_finite() {
        return Err(Error::InvalidArgument(format!("bin width {bin_width} must be positive")));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
    }
    let n_bins = bin_count(bin_width, lo, hi);
    let slack = (hi - lo) * T::from_f64_lossy(1e-9);
    let mut counts = vec![0u64; n_bins];
    for &x in samples {
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::InvalidArgument(format!(
                "sample {x} outside [{lo}, {hi}]"
            )));
        }
        let b = ((x - lo) / bin_width).floor().to_f64().unwrap_or(0.0);
        let b = (b.max(0.0) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let scale = T::one() / (T::from_usize_lossy(samples.len()) * bin_width);
    let density = counts
        .iter()
        .map(|&c| T::from_f64_lossy(c as f64) * scale)
        .collect();
    Ok(Histogram {
        width: bin_width,
        lo,
        hi,
        counts,
        density,
    })
}
