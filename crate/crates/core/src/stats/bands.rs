use super::density::DensityEstimate;

/// Default band threshold, as a fraction of the peak density.
pub const DEFAULT_RELATIVE_PROMINENCE: f64 = 0.02;

/// Modes of a kernel density whose prominence clears a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BandReport {
    pub mode_locations: Vec<f64>,
    pub mode_prominences: Vec<f64>,
    pub mode_spacings: Vec<f64>,
    pub prominence_threshold: f64,
}

impl BandReport {
    pub fn n_modes(&self) -> usize {
        self.mode_locations.len()
    }
}

/// `fraction` of the peak density of `d`, in density units.
pub fn relative_threshold(d: &DensityEstimate, fraction: f64) -> f64 {
    fraction * d.peak_density()
}

/// Local maxima of the kernel density with prominence (height above the
/// higher of the two flanking minima) at least `prominence_threshold`.
///
/// Flat tops count once, located at their midpoint.
pub fn detect_bands(d: &DensityEstimate, prominence_threshold: f64) -> BandReport {
    let y = &d.kde_values;
    let mut locations = Vec::new();
    let mut prominences = Vec::new();

    for peak in local_maxima(y) {
        let p = prominence(y, peak);
        if p >= prominence_threshold {
            locations.push(d.kde_grid[peak]);
            prominences.push(p);
        }
    }
    let spacings = locations.windows(2).map(|w| w[1] - w[0]).collect();
    BandReport {
        mode_locations: locations,
        mode_prominences: prominences,
        mode_spacings: spacings,
        prominence_threshold,
    }
}

fn local_maxima(y: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let n = y.len();
    let mut i = 1;
    while i + 1 < n {
        if y[i - 1] < y[i] {
            let mut j = i + 1;
            while j < n - 1 && y[j] == y[i] {
                j += 1;
            }
            if y[j] < y[i] {
                peaks.push((i + j - 1) / 2);
                i = j;
                continue;
            }
        }
        i += 1;
    }
    peaks
}

fn prominence(y: &[f64], peak: usize) -> f64 {
    let h = y[peak];
    let mut left_min = h;
    for &v in y[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &y[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}
