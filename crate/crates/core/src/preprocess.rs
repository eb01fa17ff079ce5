//! Catalog preprocessing: flux smoothing, waiting-time extraction, min-max
//! scaling, and regularization of the event sequence onto a fixed interval grid.

use std::io::{BufRead, BufReader, Read, Write};

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{class_of_flux, utc_day, CatalogError, FlareCatalog, FlareClass};

/// Background-level flux used to fill empty intervals, in W/m^2.
pub const FLOOR_FLUX: f64 = 2.071e-8;

/// Gaps between successive flares at or above this length split the
/// regularized series into separate runs.
pub const RUN_BREAK_HOURS: f64 = 21.0;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("flux {value:e} outside smoothing domain [{lo:e}, {hi:e}]")]
    FluxOutsideDomain { value: f64, lo: f64, hi: f64 },
    #[error("invalid smoothing config: {0}")]
    InvalidSmoothing(String),
    #[error("interval of {0} hours does not divide 24")]
    IntervalNotDividing(u32),
    #[error("cannot fit min-max parameters on an empty sequence")]
    EmptyFit,
    #[error("catalog error: {0}")]
    Catalog(#[from] CatalogError),
    #[error("malformed series file: {0}")]
    MalformedSeries(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Bin spacing for flux smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinSpacing {
    Linear,
    Logarithmic,
}

/// Configuration for [`smooth_fluxes`]. The domain must cover every flux in
/// the catalog; bins are equal-width in the chosen spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub n_bins: usize,
    pub spacing: BinSpacing,
    pub flux_min: f64,
    pub flux_max: f64,
}

impl SmoothingConfig {
    /// Default smoothing: 500 logarithmic bins over the given domain.
    pub fn new(flux_min: f64, flux_max: f64) -> Self {
        SmoothingConfig {
            n_bins: 500,
            spacing: BinSpacing::Logarithmic,
            flux_min,
            flux_max,
        }
    }

    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.n_bins < 1 {
            return Err(PreprocessError::InvalidSmoothing("n_bins must be >= 1".into()));
        }
        if !(self.flux_min < self.flux_max) {
            return Err(PreprocessError::InvalidSmoothing(
                "flux_min must be < flux_max".into(),
            ));
        }
        if self.spacing == BinSpacing::Logarithmic && self.flux_min <= 0.0 {
            return Err(PreprocessError::InvalidSmoothing(
                "flux_min must be > 0 for logarithmic spacing".into(),
            ));
        }
        Ok(())
    }

    /// The `n_bins + 1` bin edges, equal-width in the configured spacing.
    pub fn bin_edges(&self) -> Vec<f64> {
        let n = self.n_bins;
        match self.spacing {
            BinSpacing::Linear => (0..=n)
                .map(|i| self.flux_min + (self.flux_max - self.flux_min) * i as f64 / n as f64)
                .collect(),
            BinSpacing::Logarithmic => {
                let (lo, hi) = (self.flux_min.ln(), self.flux_max.ln());
                (0..=n)
                    .map(|i| (lo + (hi - lo) * i as f64 / n as f64).exp())
                    .collect()
            }
        }
    }

    /// Index of the half-open bin containing `value`; the last bin is closed
    /// above. `None` when the value lies outside the domain.
    pub fn bin_index(&self, value: f64) -> Option<usize> {
        if !(value >= self.flux_min && value <= self.flux_max) {
            return None;
        }
        let position = match self.spacing {
            BinSpacing::Linear => {
                (value - self.flux_min) / (self.flux_max - self.flux_min) * self.n_bins as f64
            }
            BinSpacing::Logarithmic => {
                (value.ln() - self.flux_min.ln()) / (self.flux_max.ln() - self.flux_min.ln())
                    * self.n_bins as f64
            }
        };
        Some((position.floor() as usize).min(self.n_bins - 1))
    }
}

/// Replaces every peak flux by the arithmetic mean of all catalog fluxes that
/// share its bin. Flare classes are re-derived from the smoothed fluxes.
/// Smoothing twice with the same config equals smoothing once.
pub fn smooth_fluxes(
    catalog: &FlareCatalog,
    cfg: &SmoothingConfig,
) -> Result<FlareCatalog, PreprocessError> {
    cfg.validate()?;
    if catalog.is_empty() {
        return Ok(FlareCatalog::default());
    }

    let mut sums = vec![0.0f64; cfg.n_bins];
    let mut counts = vec![0usize; cfg.n_bins];
    let mut lows = vec![f64::INFINITY; cfg.n_bins];
    let mut highs = vec![f64::NEG_INFINITY; cfg.n_bins];
    let mut indices = Vec::with_capacity(catalog.len());
    for event in catalog.events() {
        let bin = cfg
            .bin_index(event.peak_flux)
            .ok_or(PreprocessError::FluxOutsideDomain {
                value: event.peak_flux,
                lo: cfg.flux_min,
                hi: cfg.flux_max,
            })?;
        sums[bin] += event.peak_flux;
        counts[bin] += 1;
        lows[bin] = lows[bin].min(event.peak_flux);
        highs[bin] = highs[bin].max(event.peak_flux);
        indices.push(bin);
    }

    // The exact mean lies within the members' range; clamp away summation
    // rounding so smoothing stays idempotent and never leaves the bin.
    let smoothed: Vec<f64> = indices
        .iter()
        .map(|&bin| (sums[bin] / counts[bin] as f64).clamp(lows[bin], highs[bin]))
        .collect();
    Ok(catalog.with_fluxes(&smoothed)?)
}

/// Min-max scaling parameters for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxParams {
    pub feature: String,
    pub observed_min: f64,
    pub observed_max: f64,
}

impl MinMaxParams {
    /// Maps a value to `(v - min) / (max - min)`. Values outside the observed
    /// range map outside `[0, 1]` without clamping; a degenerate range maps
    /// everything to 0.
    pub fn apply(&self, value: f64) -> f64 {
        let range = self.observed_max - self.observed_min;
        if range == 0.0 {
            0.0
        } else {
            (value - self.observed_min) / range
        }
    }
}

/// Fits min-max parameters over a nonempty value sequence.
pub fn fit_minmax(feature: &str, values: &[f64]) -> Result<MinMaxParams, PreprocessError> {
    if values.is_empty() {
        return Err(PreprocessError::EmptyFit);
    }
    let mut observed_min = f64::INFINITY;
    let mut observed_max = f64::NEG_INFINITY;
    for &v in values {
        observed_min = observed_min.min(v);
        observed_max = observed_max.max(v);
    }
    Ok(MinMaxParams {
        feature: feature.to_string(),
        observed_min,
        observed_max,
    })
}

/// Applies min-max parameters elementwise.
pub fn apply_minmax(values: &[f64], params: &MinMaxParams) -> Vec<f64> {
    values.iter().map(|&v| params.apply(v)).collect()
}

/// One element of the event-paced (irregular) series.
#[derive(Debug, Clone, PartialEq)]
pub struct IrregularEntry {
    pub peak_time: DateTime<Utc>,
    pub peak_flux: f64,
    /// Seconds since the previous flare's peak; 0 for the first entry.
    pub waiting_time: f64,
    pub flare_class: FlareClass,
}

/// Per-event (flux, waiting-time) sequence in catalog order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IrregularSeries {
    pub entries: Vec<IrregularEntry>,
    /// Scaling parameters per feature when the series has been normalized.
    pub normalization: Option<Vec<MinMaxParams>>,
}

/// Builds the irregular series: one entry per event, waiting times as
/// peak-to-peak differences, first waiting time 0.
pub fn build_irregular_series(catalog: &FlareCatalog) -> IrregularSeries {
    let mut entries = Vec::with_capacity(catalog.len());
    let mut previous: Option<DateTime<Utc>> = None;
    for event in catalog.events() {
        let waiting_time = previous
            .map(|p| (event.peak_time - p).num_seconds() as f64)
            .unwrap_or(0.0);
        entries.push(IrregularEntry {
            peak_time: event.peak_time,
            peak_flux: event.peak_flux,
            waiting_time,
            flare_class: event.flare_class,
        });
        previous = Some(event.peak_time);
    }
    IrregularSeries {
        entries,
        normalization: None,
    }
}

/// One contiguous stretch of the regularized series: interval starts advance
/// by exactly the interval length from `values[0].0` onward.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularRun {
    pub values: Vec<(DateTime<Utc>, f64)>,
}

/// Fixed-interval maximum-flux series, split into runs at long gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularSeries {
    pub segments: Vec<RegularRun>,
    pub interval_hours: u32,
}

impl RegularSeries {
    /// Total number of values across all runs.
    pub fn len(&self) -> usize {
        self.segments.iter().map(|r| r.values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Converts the catalog into a fixed-interval series:
///
/// 1. days with no flares are removed entirely;
/// 2. every remaining day is tiled into `24 / interval_hours` intervals whose
///    value is the maximum peak flux of the flares peaking inside;
/// 3. an empty interval bordering a flare less than 3 h away takes that
///    flare's flux;
/// 4. all other empty intervals take the background floor [`FLOOR_FLUX`];
/// 5. the series breaks into separate runs wherever successive flares are
///    [`RUN_BREAK_HOURS`] or more apart, so runs never bridge removed days.
pub fn regularize(
    catalog: &FlareCatalog,
    interval_hours: u32,
) -> Result<RegularSeries, PreprocessError> {
    if interval_hours == 0 || 24 % interval_hours != 0 {
        return Err(PreprocessError::IntervalNotDividing(interval_hours));
    }
    let events = catalog.events();
    if events.is_empty() {
        return Ok(RegularSeries {
            segments: Vec::new(),
            interval_hours,
        });
    }

    // Group events into day-runs. A new run starts whenever the real-time gap
    // between successive flares reaches the break threshold; a full removed
    // day always implies such a gap, so runs cover consecutive active days.
    let break_gap = Duration::seconds((RUN_BREAK_HOURS * 3600.0) as i64);
    let mut day_runs: Vec<Vec<(NaiveDate, Vec<usize>)>> = Vec::new();
    let mut current_run: Vec<(NaiveDate, Vec<usize>)> = Vec::new();
    for (idx, event) in events.iter().enumerate() {
        let day = utc_day(event.peak_time);
        let gap_break = idx > 0 && event.peak_time - events[idx - 1].peak_time >= break_gap;
        let same_day = current_run.last().map(|(d, _)| *d == day).unwrap_or(false);
        if gap_break && !same_day && !current_run.is_empty() {
            day_runs.push(std::mem::take(&mut current_run));
        }
        if current_run.last().map(|(d, _)| *d) != Some(day) {
            current_run.push((day, Vec::new()));
        }
        current_run.last_mut().unwrap().1.push(idx);
    }
    if !current_run.is_empty() {
        day_runs.push(current_run);
    }

    let slots_per_day = (24 / interval_hours) as usize;
    let interval = Duration::hours(interval_hours as i64);
    let mut segments = Vec::with_capacity(day_runs.len());

    for run_days in &day_runs {
        let first_day = run_days[0].0;
        let n_slots = run_days.len() * slots_per_day;
        let run_start = Utc.from_utc_datetime(&first_day.and_hms_opt(0, 0, 0).unwrap());

        // Maximum flux per slot, where occupied; flare (time, flux) pairs in
        // chronological order for the boundary-fill lookups.
        let mut slot_max: Vec<Option<f64>> = vec![None; n_slots];
        let mut run_flares: Vec<(DateTime<Utc>, f64)> = Vec::new();
        for (day, indices) in run_days {
            let day_offset = (*day - first_day).num_days() as usize * slots_per_day;
            for &idx in indices {
                let event = &events[idx];
                let seconds_into_day = (event.peak_time
                    - Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).unwrap()))
                .num_seconds();
                let slot = day_offset + (seconds_into_day / (interval_hours as i64 * 3600)) as usize;
                let entry = slot_max[slot].get_or_insert(f64::NEG_INFINITY);
                *entry = entry.max(event.peak_flux);
                run_flares.push((event.peak_time, event.peak_flux));
            }
        }

        // Fill empty slots: a flare in the neighboring slot closer than 3 h to
        // the shared edge donates its flux, everything else gets the floor.
        let boundary_gap = Duration::hours(3);
        let mut values = Vec::with_capacity(n_slots);
        for slot in 0..n_slots {
            let slot_start = run_start + interval * slot as i32;
            let flux = match slot_max[slot] {
                Some(max) => max,
                None => {
                    let slot_end = slot_start + interval;
                    // The slot is empty, so every run flare lies strictly
                    // before slot_start or at/after slot_end.
                    let split = run_flares.partition_point(|&(t, _)| t < slot_start);
                    let prev = split.checked_sub(1).map(|i| run_flares[i]);
                    let next = run_flares.get(split).copied();
                    let prev_gap = prev.map(|(t, _)| slot_start - t);
                    let next_gap = next.map(|(t, _)| t - slot_end);
                    let prev_ok = prev_gap.map(|g| g < boundary_gap).unwrap_or(false);
                    let next_ok = next_gap.map(|g| g < boundary_gap).unwrap_or(false);
                    if prev_ok && (!next_ok || prev_gap <= next_gap) {
                        prev.unwrap().1
                    } else if next_ok {
                        next.unwrap().1
                    } else {
                        FLOOR_FLUX
                    }
                }
            };
            values.push((slot_start, flux));
        }
        segments.push(RegularRun { values });
    }

    Ok(RegularSeries {
        segments,
        interval_hours,
    })
}

/// Derives the flare class of a regularized value.
pub fn class_of_regular_value(flux: f64) -> Result<FlareClass, CatalogError> {
    class_of_flux(flux)
}

/// Writes the irregular series in the columnar text format
/// `peak_time flux waiting_seconds class`.
pub fn write_irregular_series<W: Write>(
    series: &IrregularSeries,
    mut out: W,
) -> Result<(), PreprocessError> {
    writeln!(out, "# flarecast irregular-series v1")?;
    writeln!(out, "# columns: peak_time flux waiting_seconds class")?;
    for e in &series.entries {
        writeln!(
            out,
            "{} {:e} {} {}",
            e.peak_time.format("%Y-%m-%dT%H:%M:%SZ"),
            e.peak_flux,
            e.waiting_time,
            e.flare_class
        )?;
    }
    Ok(())
}

/// Writes the regular series in the columnar text format
/// `run interval_start flux`.
pub fn write_regular_series<W: Write>(
    series: &RegularSeries,
    mut out: W,
) -> Result<(), PreprocessError> {
    writeln!(out, "# flarecast regular-series v1 interval_hours={}", series.interval_hours)?;
    writeln!(out, "# columns: run interval_start flux")?;
    for (run_idx, run) in series.segments.iter().enumerate() {
        for (start, flux) in &run.values {
            writeln!(out, "{} {} {:e}", run_idx, start.format("%Y-%m-%dT%H:%M:%SZ"), flux)?;
        }
    }
    Ok(())
}

/// Reads back the [`write_regular_series`] format.
pub fn read_regular_series<R: Read>(input: R) -> Result<RegularSeries, PreprocessError> {
    let reader = BufReader::new(input);
    let mut interval_hours = 3u32;
    let mut segments: Vec<RegularRun> = Vec::new();
    let mut current_run: Option<usize> = None;
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(field) = line.split_whitespace().find(|t| t.starts_with("interval_hours=")) {
                interval_hours = field["interval_hours=".len()..]
                    .parse()
                    .map_err(|_| PreprocessError::MalformedSeries(format!("line {}", line_no + 1)))?;
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let bad = || PreprocessError::MalformedSeries(format!("line {}", line_no + 1));
        let run: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let start = crate::catalog::parse_time(parts.next().ok_or_else(bad)?).ok_or_else(bad)?;
        let flux: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if current_run != Some(run) {
            segments.push(RegularRun { values: Vec::new() });
            current_run = Some(run);
        }
        segments.last_mut().unwrap().values.push((start, flux));
    }
    Ok(RegularSeries {
        segments,
        interval_hours,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::FlareEvent;
    use proptest::prelude::*;

    fn time(text: &str) -> DateTime<Utc> {
        crate::catalog::parse_time(text).unwrap()
    }

    fn event(id: &str, peak: &str, flux: f64) -> FlareEvent {
        let peak_time = time(peak);
        FlareEvent {
            event_id: id.to_string(),
            start_time: peak_time,
            peak_time,
            end_time: peak_time,
            peak_flux: flux,
            flare_class: class_of_flux(flux).unwrap(),
            background_flux: None,
            total_flux: None,
            multiple_id: None,
        }
    }

    fn catalog_at(fluxes_at_times: &[(&str, f64)]) -> FlareCatalog {
        FlareCatalog::new(
            fluxes_at_times
                .iter()
                .enumerate()
                .map(|(i, (t, f))| event(&format!("e{i}"), t, *f))
                .collect(),
        )
    }

    #[test]
    fn default_smoothing_has_501_edges() {
        let cfg = SmoothingConfig::new(2.071e-8, 2.628e-3);
        assert_eq!(cfg.n_bins, 500);
        let edges = cfg.bin_edges();
        assert_eq!(edges.len(), 501);
        assert!((edges[0] - 2.071e-8).abs() < 1e-20);
        assert!((edges[500] - 2.628e-3).abs() < 1e-12);
    }

    #[test]
    fn smoothing_constant_catalog_is_identity() {
        let catalog = catalog_at(&[
            ("2010-01-01T00:00:00Z", 4e-6),
            ("2010-01-01T01:00:00Z", 4e-6),
        ]);
        let cfg = SmoothingConfig::new(1e-8, 1e-3);
        let smoothed = smooth_fluxes(&catalog, &cfg).unwrap();
        for e in smoothed.events() {
            assert_eq!(e.peak_flux, 4e-6);
        }
    }

    #[test]
    fn smoothing_averages_within_a_bin() {
        // Two fluxes a and b in the same bin become (a + b) / 2.
        let a = 4.00e-6;
        let b = 4.01e-6;
        let catalog = catalog_at(&[("2010-01-01T00:00:00Z", a), ("2010-01-01T01:00:00Z", b)]);
        let cfg = SmoothingConfig::new(1e-8, 1e-3);
        assert_eq!(cfg.bin_index(a), cfg.bin_index(b));
        let smoothed = smooth_fluxes(&catalog, &cfg).unwrap();
        for e in smoothed.events() {
            assert!((e.peak_flux - (a + b) / 2.0).abs() < 1e-18);
        }
    }

    #[test]
    fn smoothing_rejects_out_of_domain_flux() {
        let catalog = catalog_at(&[("2010-01-01T00:00:00Z", 5e-3)]);
        let cfg = SmoothingConfig::new(1e-8, 1e-3);
        assert!(matches!(
            smooth_fluxes(&catalog, &cfg),
            Err(PreprocessError::FluxOutsideDomain { .. })
        ));
    }

    #[test]
    fn waiting_times_are_peak_to_peak() {
        let catalog = catalog_at(&[
            ("2010-01-01T00:00:00Z", 1e-6),
            ("2010-01-01T00:01:40Z", 1e-6),
            ("2010-01-01T00:04:10Z", 1e-6),
        ]);
        let series = build_irregular_series(&catalog);
        let waits: Vec<f64> = series.entries.iter().map(|e| e.waiting_time).collect();
        assert_eq!(waits, vec![0.0, 100.0, 150.0]);
    }

    #[test]
    fn single_event_has_zero_waiting_time() {
        let series = build_irregular_series(&catalog_at(&[("2010-01-01T00:00:00Z", 1e-6)]));
        assert_eq!(series.entries.len(), 1);
        assert_eq!(series.entries[0].waiting_time, 0.0);
    }

    #[test]
    fn minmax_examples() {
        let params = fit_minmax("flux", &[2.0, 4.0, 10.0]).unwrap();
        assert_eq!(params.apply(2.0), 0.0);
        assert_eq!(params.apply(10.0), 1.0);
        // no clamping above the observed range
        assert_eq!(params.apply(18.0), 2.0);

        let degenerate = fit_minmax("flux", &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(degenerate.apply(3.0), 0.0);

        assert!(matches!(fit_minmax("flux", &[]), Err(PreprocessError::EmptyFit)));
    }

    #[test]
    fn regularize_fills_a_single_day() {
        // Flares at 01:00 and 02:00 only: interval [00,03) takes the max,
        // [03,06) is within 3 h of the 02:00 flare, the rest gets the floor.
        let catalog = catalog_at(&[
            ("2010-01-05T01:00:00Z", 1e-6),
            ("2010-01-05T02:00:00Z", 3e-6),
        ]);
        let series = regularize(&catalog, 3).unwrap();
        assert_eq!(series.segments.len(), 1);
        let values: Vec<f64> = series.segments[0].values.iter().map(|v| v.1).collect();
        assert_eq!(values.len(), 8);
        assert_eq!(values[0], 3e-6);
        assert_eq!(values[1], 3e-6); // boundary fill from the 02:00 flare
        for &v in &values[2..] {
            assert_eq!(v, FLOOR_FLUX);
        }
        let starts: Vec<DateTime<Utc>> =
            series.segments[0].values.iter().map(|v| v.0).collect();
        assert_eq!(starts[0], time("2010-01-05T00:00:00Z"));
        for pair in starts.windows(2) {
            assert_eq!(pair[1] - pair[0], Duration::hours(3));
        }
    }

    #[test]
    fn regularize_removes_dead_days_and_splits_runs() {
        // A flare-free day between two active days: the dead day is absent and
        // the >= 24 h flare gap splits the series into two runs.
        let catalog = catalog_at(&[
            ("2010-01-05T10:00:00Z", 1e-6),
            ("2010-01-07T10:00:00Z", 2e-6),
        ]);
        let series = regularize(&catalog, 3).unwrap();
        assert_eq!(series.segments.len(), 2);
        assert_eq!(series.len(), 16);
        assert_eq!(series.segments[0].values[0].0, time("2010-01-05T00:00:00Z"));
        assert_eq!(series.segments[1].values[0].0, time("2010-01-07T00:00:00Z"));
    }

    #[test]
    fn regularize_bridges_short_cross_midnight_gaps() {
        // 4 h gap across midnight: both days join one 16-slot run.
        let catalog = catalog_at(&[
            ("2010-01-05T22:00:00Z", 1e-6),
            ("2010-01-06T02:00:00Z", 2e-6),
        ]);
        let series = regularize(&catalog, 3).unwrap();
        assert_eq!(series.segments.len(), 1);
        assert_eq!(series.len(), 16);
    }

    #[test]
    fn regularize_splits_on_21h_gap_without_dead_day() {
        let catalog = catalog_at(&[
            ("2010-01-05T01:00:00Z", 1e-6),
            ("2010-01-05T23:30:00Z", 2e-6),
            ("2010-01-06T23:00:00Z", 3e-6), // 23.5 h after the previous flare
        ]);
        let series = regularize(&catalog, 3).unwrap();
        assert_eq!(series.segments.len(), 2);
        assert_eq!(series.segments[0].values.len(), 8);
        assert_eq!(series.segments[1].values.len(), 8);
    }

    #[test]
    fn regularize_rejects_bad_interval() {
        let catalog = catalog_at(&[("2010-01-05T01:00:00Z", 1e-6)]);
        assert!(matches!(
            regularize(&catalog, 5),
            Err(PreprocessError::IntervalNotDividing(5))
        ));
    }

    #[test]
    fn regular_series_round_trips_through_text() {
        let catalog = catalog_at(&[
            ("2010-01-05T01:00:00Z", 1e-6),
            ("2010-01-07T10:00:00Z", 2e-6),
        ]);
        let series = regularize(&catalog, 3).unwrap();
        let mut buf = Vec::new();
        write_regular_series(&series, &mut buf).unwrap();
        let back = read_regular_series(buf.as_slice()).unwrap();
        assert_eq!(back, series);
    }

    proptest! {
        #[test]
        fn smoothing_is_idempotent_and_preserves_bins(
            fluxes in proptest::collection::vec(2.08e-8f64..2.6e-3, 1..80),
            n_bins in 1usize..600,
            log_spacing in any::<bool>(),
        ) {
            let catalog = FlareCatalog::new(
                fluxes.iter().enumerate().map(|(i, &f)| {
                    event(&format!("e{i}"), "2010-01-01T00:00:00Z", f)
                }).collect());
            let cfg = SmoothingConfig {
                n_bins,
                spacing: if log_spacing { BinSpacing::Logarithmic } else { BinSpacing::Linear },
                flux_min: 2.071e-8,
                flux_max: 2.628e-3,
            };
            let once = smooth_fluxes(&catalog, &cfg).unwrap();
            let twice = smooth_fluxes(&once, &cfg).unwrap();
            prop_assert_eq!(&once, &twice);
            for (orig, sm) in catalog.events().iter().zip(once.events()) {
                prop_assert_eq!(cfg.bin_index(orig.peak_flux), cfg.bin_index(sm.peak_flux));
            }
        }

        #[test]
        fn minmax_normalizes_to_unit_range(
            values in proptest::collection::vec(-1e6f64..1e6, 2..200)
        ) {
            let params = fit_minmax("v", &values).unwrap();
            let scaled = apply_minmax(&values, &params);
            let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if params.observed_max > params.observed_min {
                prop_assert!((lo - 0.0).abs() < 1e-12);
                prop_assert!((hi - 1.0).abs() < 1e-12);
            } else {
                prop_assert_eq!(lo, 0.0);
                prop_assert_eq!(hi, 0.0);
            }
        }

        #[test]
        fn regularize_output_is_gridded_and_floored(
            day_offsets in proptest::collection::vec(0i64..40, 1..60),
            minute_offsets in proptest::collection::vec(0i64..1440, 1..60),
            fluxes in proptest::collection::vec(2.08e-8f64..2.6e-3, 60),
        ) {
            let base = time("2010-01-01T00:00:00Z");
            let n = day_offsets.len().min(minute_offsets.len());
            let catalog = FlareCatalog::new((0..n).map(|i| {
                let peak = base + Duration::days(day_offsets[i]) + Duration::minutes(minute_offsets[i]);
                let mut e = event(&format!("e{i}"), "2010-01-01T00:00:00Z", fluxes[i]);
                e.start_time = peak;
                e.peak_time = peak;
                e.end_time = peak;
                e
            }).collect());

            let series = regularize(&catalog, 3).unwrap();
            let mut active_days = std::collections::BTreeSet::new();
            for e in catalog.events() {
                active_days.insert(utc_day(e.peak_time));
            }
            // every active day contributes exactly 8 values
            prop_assert_eq!(series.len(), active_days.len() * 8);
            for run in &series.segments {
                for pair in run.values.windows(2) {
                    prop_assert_eq!(pair[1].0 - pair[0].0, Duration::hours(3));
                }
                for &(_, flux) in &run.values {
                    prop_assert!(flux >= FLOOR_FLUX);
                }
            }
        }
    }
}
