//! Table and chart builders shared by the commands.

use crate::lil::EnvelopeSeries;
use crate::simulate::Ensemble;
use crate::stats::{BandReport, DensityEstimate};

use super::svg::{Chart, Series};
use super::table::{Cell, Table};

pub const COLOR_FREE: &str = "blue";
pub const COLOR_BGC: &str = "red";
pub const COLOR_LIL: &str = "green";
pub const COLOR_SQRT: &str = "red";
pub const COLOR_PATH: &str = "gray";

/// Paths drawn per ensemble in line charts.
pub const SVG_PATH_CAP: usize = 25;
/// Paths drawn per ensemble in marker charts.
pub const SVG_MARKER_PATH_CAP: usize = 10;

/// `path_index,t,x` rows for the first `limit` paths (all when `None`).
pub fn paths_table(ens: &Ensemble, limit: Option<usize>) -> Table {
    let mut table = Table::new(["path_index", "t", "x"]);
    let n = limit.map_or(ens.len(), |l| l.min(ens.len()));
    for path in &ens.paths[..n] {
        for (t, x) in path.iter() {
            table.push(vec![path.path_index.into(), t.into(), x.into()]);
        }
    }
    table
}

/// Histogram and kernel density side by side; the shorter part is padded
/// with empty cells.
pub fn density_table(d: &DensityEstimate) -> Table {
    let mut table = Table::new(["bin_left", "bin_right", "count", "kde_x", "kde_y"]);
    let rows = d.counts.len().max(d.kde_grid.len());
    for i in 0..rows {
        let bin = (i < d.counts.len()).then(|| (d.bin_edges[i], d.bin_edges[i + 1], d.counts[i]));
        let kde = (i < d.kde_grid.len()).then(|| (d.kde_grid[i], d.kde_values[i]));
        table.push(vec![
            bin.map(|b| b.0).into(),
            bin.map(|b| b.1).into(),
            bin.map(|b| b.2).into(),
            kde.map(|k| k.0).into(),
            kde.map(|k| k.1).into(),
        ]);
    }
    table
}

pub fn bands_header() -> Table {
    Table::new(["run", "mode_index", "location", "prominence", "spacing"])
}

/// Appends one row per mode; `spacing` is the distance to the next mode.
pub fn push_bands(table: &mut Table, run: &str, bands: &BandReport) {
    for (i, (&loc, &prom)) in bands.mode_locations.iter().zip(&bands.mode_prominences).enumerate() {
        table.push(vec![
            Cell::from(run),
            i.into(),
            loc.into(),
            prom.into(),
            bands.mode_spacings.get(i).copied().into(),
        ]);
    }
}

fn path_series(ens: &Ensemble, label: &str, color: &str, cap: usize) -> Vec<Series> {
    ens.paths
        .iter()
        .take(cap)
        .map(|p| Series::line(label, color, p.iter().collect()).with_opacity(0.45))
        .collect()
}

/// Unconstrained paths in blue under constrained paths in red.
pub fn overlay_paths_chart(title: &str, free: &Ensemble, bgc: &Ensemble) -> Chart {
    let mut chart = Chart::new(title, "t", "X(t)");
    chart
        .series
        .extend(path_series(free, "without BGC", COLOR_FREE, SVG_PATH_CAP));
    chart
        .series
        .extend(path_series(bgc, "with BGC", COLOR_BGC, SVG_PATH_CAP));
    chart
}

/// Translucent state markers without connecting lines.
pub fn markers_chart(title: &str, ens: &Ensemble, label: &str, color: &str) -> Chart {
    let mut chart = Chart::new(title, "t", "X(t)");
    for p in ens.paths.iter().take(SVG_MARKER_PATH_CAP) {
        chart.push(Series::markers(label, color, p.iter().collect()).with_opacity(0.15));
    }
    chart
}

pub fn single_paths_chart(title: &str, ens: &Ensemble, color: &str) -> Chart {
    let mut chart = Chart::new(title, "t", "X(t)");
    chart.series.extend(path_series(ens, "paths", color, SVG_PATH_CAP));
    chart
}

/// Kernel densities of both runs, with detected modes marked.
pub fn overlay_density_chart(
    title: &str,
    free: (&DensityEstimate, &BandReport),
    bgc: (&DensityEstimate, &BandReport),
) -> Chart {
    let mut chart = Chart::new(title, "x", "density");
    for ((d, bands), label, color) in [(free, "without BGC", COLOR_FREE), (bgc, "with BGC", COLOR_BGC)] {
        chart.push(Series::line(
            label,
            color,
            d.kde_grid.iter().copied().zip(d.kde_values.iter().copied()).collect(),
        ));
        chart.push(Series::markers("modes", "black", mode_points(d, bands)));
    }
    chart
}

pub fn density_chart(title: &str, d: &DensityEstimate, bands: &BandReport, color: &str) -> Chart {
    let mut chart = Chart::new(title, "x", "density");
    chart.push(Series::line(
        "kde",
        color,
        d.kde_grid.iter().copied().zip(d.kde_values.iter().copied()).collect(),
    ));
    chart.push(Series::markers("modes", "black", mode_points(d, bands)));
    chart
}

fn mode_points(d: &DensityEstimate, bands: &BandReport) -> Vec<(f64, f64)> {
    bands
        .mode_locations
        .iter()
        .map(|&x| {
            let i = d.kde_grid.partition_point(|&g| g < x).min(d.kde_grid.len() - 1);
            (x, d.kde_values[i])
        })
        .collect()
}

/// Adds `±envelope` curves.
pub fn push_envelope(chart: &mut Chart, env: &EnvelopeSeries, label: &str, color: &str) {
    let upper: Vec<(f64, f64)> = env.times.iter().copied().zip(env.values.iter().copied()).collect();
    let lower = upper.iter().map(|&(t, v)| (t, -v)).collect();
    chart.push(Series::line(label, color, upper));
    chart.push(Series::line(label, color, lower));
}
