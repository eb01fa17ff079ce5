//! GOES-style flare event catalog: parsing, validation, and summaries.
//!
//! The catalog is a delimiter-separated file with one flare per row. Rows
//! that violate the event invariants (time ordering, flux/class agreement,
//! duplicate IDs) are quarantined into a rejection report instead of being
//! silently dropped; the remaining rows form a peak-time-sorted
//! [`FlareCatalog`].

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower edge of the A-class flux range; fluxes below this are not classifiable.
pub const CLASS_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("required column `{0}` not found in header")]
    MissingColumn(String),
    #[error("catalog contains no valid rows")]
    EmptyCatalog,
    #[error("flux {0:e} W/m^2 is below the A-class range")]
    BelowClassRange(f64),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Flare magnitude class, one decade of peak soft X-ray flux each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlareClass {
    A,
    B,
    C,
    M,
    X,
}

impl FlareClass {
    pub const ALL: [FlareClass; 5] = [
        FlareClass::A,
        FlareClass::B,
        FlareClass::C,
        FlareClass::M,
        FlareClass::X,
    ];

    /// Numeric label: A=1, B=2, C=3, M=4, X=5.
    pub fn ordinal(self) -> u8 {
        match self {
            FlareClass::A => 1,
            FlareClass::B => 2,
            FlareClass::C => 3,
            FlareClass::M => 4,
            FlareClass::X => 5,
        }
    }

    pub fn from_ordinal(ord: u8) -> Option<Self> {
        match ord {
            1 => Some(FlareClass::A),
            2 => Some(FlareClass::B),
            3 => Some(FlareClass::C),
            4 => Some(FlareClass::M),
            5 => Some(FlareClass::X),
            _ => None,
        }
    }

    /// Half-open flux range `[lo, hi)` of this class in W/m^2 (X is unbounded above).
    pub fn flux_range(self) -> (f64, f64) {
        match self {
            FlareClass::A => (1e-8, 1e-7),
            FlareClass::B => (1e-7, 1e-6),
            FlareClass::C => (1e-6, 1e-5),
            FlareClass::M => (1e-5, 1e-4),
            FlareClass::X => (1e-4, f64::INFINITY),
        }
    }

    /// Large flares are the M and X classes (flux >= 1e-5 W/m^2).
    pub fn is_large(self) -> bool {
        matches!(self, FlareClass::M | FlareClass::X)
    }

    pub fn letter(self) -> char {
        match self {
            FlareClass::A => 'A',
            FlareClass::B => 'B',
            FlareClass::C => 'C',
            FlareClass::M => 'M',
            FlareClass::X => 'X',
        }
    }

    /// Parses a class designation. Magnitude suffixes as in `"C1.2"` are accepted
    /// and ignored; only the leading letter matters.
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().chars().next()? {
            'A' | 'a' => Some(FlareClass::A),
            'B' | 'b' => Some(FlareClass::B),
            'C' | 'c' => Some(FlareClass::C),
            'M' | 'm' => Some(FlareClass::M),
            'X' | 'x' => Some(FlareClass::X),
            _ => None,
        }
    }
}

impl fmt::Display for FlareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Classifies a peak flux according to the standard decade ranges.
/// Lower bounds are inclusive, upper bounds exclusive.
pub fn class_of_flux(peak_flux: f64) -> Result<FlareClass, CatalogError> {
    if !peak_flux.is_finite() || peak_flux < CLASS_FLOOR {
        return Err(CatalogError::BelowClassRange(peak_flux));
    }
    Ok(if peak_flux < 1e-7 {
        FlareClass::A
    } else if peak_flux < 1e-6 {
        FlareClass::B
    } else if peak_flux < 1e-5 {
        FlareClass::C
    } else if peak_flux < 1e-4 {
        FlareClass::M
    } else {
        FlareClass::X
    })
}

/// One catalog row after validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlareEvent {
    pub event_id: String,
    pub start_time: DateTime<Utc>,
    pub peak_time: DateTime<Utc>,
    pub end_time: DateTime<Utc>,
    /// Peak soft X-ray flux in W/m^2, strictly positive.
    pub peak_flux: f64,
    pub flare_class: FlareClass,
    pub background_flux: Option<f64>,
    pub total_flux: Option<f64>,
    pub multiple_id: Option<String>,
}

/// Chronologically sorted (by peak time) collection of valid events.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlareCatalog {
    events: Vec<FlareEvent>,
}

impl FlareCatalog {
    /// Builds a catalog from events, sorting by peak time (stable).
    pub fn new(mut events: Vec<FlareEvent>) -> Self {
        events.sort_by_key(|e| e.peak_time);
        FlareCatalog { events }
    }

    pub fn events(&self) -> &[FlareEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `[first peak time, last peak time]`, or `None` for an empty catalog.
    pub fn span(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        Some((self.events.first()?.peak_time, self.events.last()?.peak_time))
    }

    /// Replaces the event fluxes, re-deriving each flare class from the new
    /// flux so the flux/class invariant keeps holding. Order is preserved.
    pub(crate) fn with_fluxes(&self, fluxes: &[f64]) -> Result<Self, CatalogError> {
        assert_eq!(fluxes.len(), self.events.len());
        let mut events = self.events.clone();
        for (event, &flux) in events.iter_mut().zip(fluxes) {
            event.peak_flux = flux;
            event.flare_class = class_of_flux(flux)?;
        }
        Ok(FlareCatalog { events })
    }
}

/// Column-name mapping for catalog files. Field values are the header names
/// to look for; optional columns may be absent from the file entirely.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub event_id: String,
    pub start_time: String,
    pub end_time: String,
    pub peak_time: String,
    pub peak_flux: String,
    pub class: String,
    pub background_flux: String,
    pub total_flux: String,
    pub multiple_id: String,
    /// Field delimiter of the file, a single ASCII character.
    pub delimiter: char,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            event_id: "event_id".into(),
            start_time: "start_time".into(),
            end_time: "end_time".into(),
            peak_time: "peak_time".into(),
            peak_flux: "peak_flux".into(),
            class: "class".into(),
            background_flux: "background_flux".into(),
            total_flux: "total_flux".into(),
            multiple_id: "multiple_id".into(),
            delimiter: ',',
        }
    }
}

/// A quarantined input row: never silently dropped, always reported.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub reason: String,
}

/// Result of [`parse_catalog`]: the valid subset plus the rejection report.
#[derive(Debug, Clone)]
pub struct ParsedCatalog {
    pub catalog: FlareCatalog,
    pub rejections: Vec<Rejection>,
}

struct ColumnIndices {
    event_id: usize,
    start_time: usize,
    end_time: usize,
    peak_time: usize,
    peak_flux: usize,
    class: usize,
    background_flux: Option<usize>,
    total_flux: Option<usize>,
    multiple_id: Option<usize>,
}

fn resolve_columns(header: &csv::StringRecord, map: &ColumnMap) -> Result<ColumnIndices, CatalogError> {
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let require = |name: &str| find(name).ok_or_else(|| CatalogError::MissingColumn(name.to_string()));
    Ok(ColumnIndices {
        event_id: require(&map.event_id)?,
        start_time: require(&map.start_time)?,
        end_time: require(&map.end_time)?,
        peak_time: require(&map.peak_time)?,
        peak_flux: require(&map.peak_flux)?,
        class: require(&map.class)?,
        background_flux: find(&map.background_flux),
        total_flux: find(&map.total_flux),
        multiple_id: find(&map.multiple_id),
    })
}

/// Parses a UTC instant with second resolution. Accepts RFC 3339 and the
/// bare `YYYY-MM-DD HH:MM:SS` / `YYYY-MM-DDTHH:MM:SS` forms (assumed UTC).
pub fn parse_time(text: &str) -> Option<DateTime<Utc>> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(Utc.from_utc_datetime(&naive));
        }
    }
    None
}

fn parse_flux(text: &str) -> Option<f64> {
    let value: f64 = text.trim().parse().ok()?;
    value.is_finite().then_some(value)
}

fn parse_optional_flux(field: Option<&str>) -> Result<Option<f64>, String> {
    match field.map(str::trim) {
        None | Some("") => Ok(None),
        Some(text) => parse_flux(text)
            .map(Some)
            .ok_or_else(|| format!("unparseable flux `{text}`")),
    }
}

/// Parses a delimiter-separated catalog. Rows failing any event invariant are
/// collected into the rejection report; the valid remainder is returned
/// sorted by peak time. Fails outright only on schema-level problems or when
/// no valid row survives.
pub fn parse_catalog<R: Read>(source: R, map: &ColumnMap) -> Result<ParsedCatalog, CatalogError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(map.delimiter as u8)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);

    let header = reader.headers()?.clone();
    let cols = resolve_columns(&header, map)?;

    let mut events = Vec::new();
    let mut rejections = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();

    for (row_index, record) in reader.records().enumerate() {
        let line = row_index as u64 + 2; // header occupies line 1
        let reject = |reason: String, rejections: &mut Vec<Rejection>| {
            rejections.push(Rejection { line, reason });
        };
        let record = match record {
            Ok(r) => r,
            Err(err) => {
                reject(format!("malformed row: {err}"), &mut rejections);
                continue;
            }
        };
        match parse_event(&record, &cols) {
            Ok(event) => {
                if !seen_ids.insert(event.event_id.clone()) {
                    reject(format!("duplicate event_id `{}`", event.event_id), &mut rejections);
                } else {
                    events.push(event);
                }
            }
            Err(reason) => reject(reason, &mut rejections),
        }
    }

    if events.is_empty() {
        return Err(CatalogError::EmptyCatalog);
    }
    Ok(ParsedCatalog {
        catalog: FlareCatalog::new(events),
        rejections,
    })
}

fn parse_event(record: &csv::StringRecord, cols: &ColumnIndices) -> Result<FlareEvent, String> {
    let field = |idx: usize| record.get(idx).unwrap_or("");
    let time = |idx: usize, name: &str| {
        parse_time(field(idx)).ok_or_else(|| format!("unparseable {name} `{}`", field(idx)))
    };

    let event_id = field(cols.event_id).to_string();
    if event_id.is_empty() {
        return Err("empty event_id".into());
    }
    let start_time = time(cols.start_time, "start_time")?;
    let peak_time = time(cols.peak_time, "peak_time")?;
    let end_time = time(cols.end_time, "end_time")?;
    let peak_flux = parse_flux(field(cols.peak_flux))
        .ok_or_else(|| format!("unparseable peak_flux `{}`", field(cols.peak_flux)))?;
    let class_text = field(cols.class);
    let listed_class =
        FlareClass::parse(class_text).ok_or_else(|| format!("unparseable class `{class_text}`"))?;

    if !(start_time <= peak_time && peak_time <= end_time) {
        return Err("times violate start <= peak <= end".into());
    }
    if peak_flux <= 0.0 {
        return Err(format!("non-positive peak_flux {peak_flux:e}"));
    }
    let derived_class = class_of_flux(peak_flux)
        .map_err(|_| format!("peak_flux {peak_flux:e} below the A-class range"))?;
    if derived_class != listed_class {
        return Err(format!(
            "class mismatch: flux {peak_flux:e} implies {derived_class}, row says {listed_class}"
        ));
    }

    let background_flux = parse_optional_flux(cols.background_flux.map(&field))
        .map_err(|e| format!("background_flux: {e}"))?;
    let total_flux =
        parse_optional_flux(cols.total_flux.map(&field)).map_err(|e| format!("total_flux: {e}"))?;
    let multiple_id = cols
        .multiple_id
        .map(&field)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from);

    Ok(FlareEvent {
        event_id,
        start_time,
        peak_time,
        end_time,
        peak_flux,
        flare_class: listed_class,
        background_flux,
        total_flux,
        multiple_id,
    })
}

fn format_time(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Re-emits a catalog in the canonical file format. `parse_catalog` on the
/// output reproduces the catalog exactly.
pub fn serialize_catalog<W: Write>(
    catalog: &FlareCatalog,
    map: &ColumnMap,
    out: W,
) -> Result<(), CatalogError> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(map.delimiter as u8)
        .from_writer(out);
    writer.write_record([
        map.event_id.as_str(),
        map.start_time.as_str(),
        map.peak_time.as_str(),
        map.end_time.as_str(),
        map.peak_flux.as_str(),
        map.class.as_str(),
        map.background_flux.as_str(),
        map.total_flux.as_str(),
        map.multiple_id.as_str(),
    ])?;
    let opt_flux = |f: Option<f64>| f.map(|v| format!("{v:e}")).unwrap_or_default();
    for e in catalog.events() {
        writer.write_record([
            e.event_id.clone(),
            format_time(e.start_time),
            format_time(e.peak_time),
            format_time(e.end_time),
            format!("{:e}", e.peak_flux),
            e.flare_class.to_string(),
            opt_flux(e.background_flux),
            opt_flux(e.total_flux),
            e.multiple_id.clone().unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-class event counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "C")]
    pub c: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "X")]
    pub x: usize,
}

impl ClassCounts {
    pub fn get(&self, class: FlareClass) -> usize {
        match class {
            FlareClass::A => self.a,
            FlareClass::B => self.b,
            FlareClass::C => self.c,
            FlareClass::M => self.m,
            FlareClass::X => self.x,
        }
    }

    fn bump(&mut self, class: FlareClass) {
        match class {
            FlareClass::A => self.a += 1,
            FlareClass::B => self.b += 1,
            FlareClass::C => self.c += 1,
            FlareClass::M => self.m += 1,
            FlareClass::X => self.x += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.a + self.b + self.c + self.m + self.x
    }
}

/// Catalog-level summary: class mix, span, and daily-count statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogSummary {
    pub total_events: usize,
    pub class_counts: ClassCounts,
    pub span_start: DateTime<Utc>,
    pub span_end: DateTime<Utc>,
    /// UTC calendar days in the inclusive span.
    pub days_in_span: u64,
    /// Days in the span with no recorded flare.
    pub zero_flare_days: u64,
    /// Events per day averaged over the whole span.
    pub mean_daily_count: f64,
    pub max_daily_count: u32,
    /// Earliest date attaining the maximum daily count.
    pub max_daily_date: NaiveDate,
    /// Count for every day of the span, zero-flare days included.
    pub daily_counts: Vec<DailyCount>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyCount {
    pub date: NaiveDate,
    pub count: u32,
}

/// Summarizes a nonempty catalog. Daily counting uses UTC calendar days of
/// the peak times over the inclusive catalog span.
pub fn summarize(catalog: &FlareCatalog) -> Result<CatalogSummary, CatalogError> {
    let (span_start, span_end) = catalog.span().ok_or(CatalogError::EmptyCatalog)?;
    let first_day = span_start.date_naive();
    let last_day = span_end.date_naive();
    let days_in_span = (last_day - first_day).num_days() as u64 + 1;

    let mut class_counts = ClassCounts::default();
    let mut daily = vec![0u32; days_in_span as usize];
    for event in catalog.events() {
        class_counts.bump(event.flare_class);
        let day_index = (event.peak_time.date_naive() - first_day).num_days() as usize;
        daily[day_index] += 1;
    }

    let zero_flare_days = daily.iter().filter(|&&c| c == 0).count() as u64;
    let (max_index, &max_daily_count) = daily
        .iter()
        .enumerate()
        .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
        .expect("span is nonempty");
    let daily_counts = daily
        .iter()
        .enumerate()
        .map(|(i, &count)| DailyCount {
            date: first_day + chrono::Duration::days(i as i64),
            count,
        })
        .collect();

    Ok(CatalogSummary {
        total_events: catalog.len(),
        class_counts,
        span_start,
        span_end,
        days_in_span,
        zero_flare_days,
        mean_daily_count: catalog.len() as f64 / days_in_span as f64,
        max_daily_count,
        max_daily_date: first_day + chrono::Duration::days(max_index as i64),
        daily_counts,
    })
}

/// UTC calendar day of an instant. Shared by the summary and regularization code.
pub(crate) fn utc_day(t: DateTime<Utc>) -> NaiveDate {
    NaiveDate::from_ymd_opt(t.year(), t.month(), t.day()).expect("valid date")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn time(text: &str) -> DateTime<Utc> {
        parse_time(text).unwrap()
    }

    pub(crate) fn event(id: &str, peak: &str, flux: f64) -> FlareEvent {
        let peak_time = time(peak);
        FlareEvent {
            event_id: id.to_string(),
            start_time: peak_time - chrono::Duration::minutes(5),
            peak_time,
            end_time: peak_time + chrono::Duration::minutes(5),
            peak_flux: flux,
            flare_class: class_of_flux(flux).unwrap(),
            background_flux: None,
            total_flux: None,
            multiple_id: None,
        }
    }

    #[test]
    fn class_of_flux_matches_decade_ranges() {
        assert_eq!(class_of_flux(5.0e-6).unwrap(), FlareClass::C);
        // boundaries are inclusive below
        assert_eq!(class_of_flux(1.0e-5).unwrap(), FlareClass::M);
        // catalog extremes
        assert_eq!(class_of_flux(2.628e-3).unwrap(), FlareClass::X);
        assert_eq!(class_of_flux(2.071e-8).unwrap(), FlareClass::A);
        assert!(matches!(
            class_of_flux(9.9e-9),
            Err(CatalogError::BelowClassRange(_))
        ));
    }

    #[test]
    fn ordinals_are_fixed() {
        let ordinals: Vec<u8> = FlareClass::ALL.iter().map(|c| c.ordinal()).collect();
        assert_eq!(ordinals, vec![1, 2, 3, 4, 5]);
        for class in FlareClass::ALL {
            assert_eq!(FlareClass::from_ordinal(class.ordinal()), Some(class));
        }
    }

    #[test]
    fn flux_ranges_match_classification() {
        for class in FlareClass::ALL {
            let (lo, hi) = class.flux_range();
            assert_eq!(class_of_flux(lo).unwrap(), class);
            if hi.is_finite() {
                assert_ne!(class_of_flux(hi).unwrap(), class);
            }
        }
    }

    const CSV_OK: &str = "\
event_id,start_time,peak_time,end_time,peak_flux,class
e1,2003-11-01T00:00:00Z,2003-11-01T00:10:00Z,2003-11-01T00:20:00Z,2.5e-6,C
e2,2003-11-01T01:00:00Z,2003-11-01T01:05:00Z,2003-11-01T01:30:00Z,3.1e-5,M
";

    #[test]
    fn parses_valid_rows() {
        let parsed = parse_catalog(CSV_OK.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(parsed.catalog.len(), 2);
        assert!(parsed.rejections.is_empty());
        assert_eq!(parsed.catalog.events()[0].flare_class, FlareClass::C);
    }

    #[test]
    fn missing_column_is_schema_error() {
        let text = "event_id,start_time,peak_time,end_time,class\ne1,a,b,c,C\n";
        let err = parse_catalog(text.as_bytes(), &ColumnMap::default()).unwrap_err();
        assert!(matches!(err, CatalogError::MissingColumn(c) if c == "peak_flux"));
    }

    #[test]
    fn header_only_is_empty_catalog() {
        let text = "event_id,start_time,peak_time,end_time,peak_flux,class\n";
        let err = parse_catalog(text.as_bytes(), &ColumnMap::default()).unwrap_err();
        assert!(matches!(err, CatalogError::EmptyCatalog));
    }

    #[test]
    fn bad_rows_are_rejected_with_line_numbers() {
        let text = "\
event_id,start_time,peak_time,end_time,peak_flux,class
e1,2003-11-01T00:00:00Z,2003-11-01T00:10:00Z,2003-11-01T00:20:00Z,2.5e-6,C
e2,2003-11-01T01:00:00Z,2003-11-01T01:05:00Z,2003-11-01T00:30:00Z,3.1e-5,M
e3,2003-11-01T02:00:00Z,2003-11-01T02:05:00Z,2003-11-01T02:30:00Z,not-a-number,M
e4,2003-11-01T03:00:00Z,2003-11-01T03:05:00Z,2003-11-01T03:30:00Z,2.5e-6,M
e1,2003-11-01T04:00:00Z,2003-11-01T04:05:00Z,2003-11-01T04:30:00Z,2.5e-6,C
";
        let parsed = parse_catalog(text.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(parsed.catalog.len(), 1);
        let lines: Vec<u64> = parsed.rejections.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![3, 4, 5, 6]);
        assert!(parsed.rejections[0].reason.contains("start <= peak <= end"));
        assert!(parsed.rejections[2].reason.contains("class mismatch"));
        assert!(parsed.rejections[3].reason.contains("duplicate"));
    }

    #[test]
    fn parsed_events_always_satisfy_class_invariant() {
        let parsed = parse_catalog(CSV_OK.as_bytes(), &ColumnMap::default()).unwrap();
        for e in parsed.catalog.events() {
            assert_eq!(class_of_flux(e.peak_flux).unwrap(), e.flare_class);
        }
    }

    #[test]
    fn serialize_parse_round_trip() {
        let text = "\
event_id,start_time,peak_time,end_time,peak_flux,class,background_flux,total_flux,multiple_id
e1,2003-11-01T00:00:00Z,2003-11-01T00:10:00Z,2003-11-01T00:20:00Z,2.5e-6,C,1.2e-8,,m7
e2,2003-11-01T01:00:00Z,2003-11-01T01:05:00Z,2003-11-01T01:30:00Z,3.1e-5,M,,4.4e-2,
";
        let map = ColumnMap::default();
        let parsed = parse_catalog(text.as_bytes(), &map).unwrap();
        let mut buf = Vec::new();
        serialize_catalog(&parsed.catalog, &map, &mut buf).unwrap();
        let reparsed = parse_catalog(buf.as_slice(), &map).unwrap();
        assert_eq!(reparsed.catalog, parsed.catalog);
        assert!(reparsed.rejections.is_empty());
    }

    #[test]
    fn summarize_counts_days_and_classes() {
        let events = vec![
            event("a", "2014-05-01T10:00:00Z", 2e-6),
            event("b", "2014-05-02T01:00:00Z", 2e-5),
            event("c", "2014-05-02T02:00:00Z", 3e-6),
            event("d", "2014-05-04T12:00:00Z", 2e-4),
        ];
        let summary = summarize(&FlareCatalog::new(events)).unwrap();
        assert_eq!(summary.total_events, 4);
        assert_eq!(summary.class_counts.c, 2);
        assert_eq!(summary.class_counts.m, 1);
        assert_eq!(summary.class_counts.x, 1);
        assert_eq!(summary.class_counts.total(), 4);
        assert_eq!(summary.days_in_span, 4);
        assert_eq!(summary.zero_flare_days, 1); // 2014-05-03
        assert_eq!(summary.max_daily_count, 2);
        assert_eq!(summary.max_daily_date, NaiveDate::from_ymd_opt(2014, 5, 2).unwrap());
        assert!((summary.mean_daily_count - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summarize_single_event() {
        let summary = summarize(&FlareCatalog::new(vec![event(
            "only",
            "2010-01-01T00:00:00Z",
            5e-7,
        )]))
        .unwrap();
        assert_eq!(summary.class_counts.b, 1);
        assert_eq!(summary.class_counts.total(), 1);
        assert_eq!(summary.days_in_span, 1);
        assert_eq!(summary.zero_flare_days, 0);
        assert_eq!(summary.max_daily_count, 1);
        assert!((summary.mean_daily_count - 1.0).abs() < 1e-12);
    }

    #[test]
    fn catalog_sorts_by_peak_time() {
        let catalog = FlareCatalog::new(vec![
            event("later", "2010-01-02T00:00:00Z", 5e-7),
            event("earlier", "2010-01-01T00:00:00Z", 5e-7),
        ]);
        assert_eq!(catalog.events()[0].event_id, "earlier");
    }
}
