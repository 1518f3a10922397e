//! End-to-end normalization of one source file under its manifest.

use std::collections::BTreeMap;

use chrono::TimeDelta;
use thiserror::Error;

use crate::containers::{
    parse_value_cell, read_canonical, read_csv, read_json, CanonicalDocument, ContainerError,
    ContainerKind, DocumentMetadata, RawTable,
};
use crate::encoding::{detect_and_decode, DecodedText, EncodingError};
use crate::epicalendar::{report_range_of, week_interval, week_of, CalendarError, EpiWeek};
use crate::geo::{Gazetteer, GeoError};
use crate::intervals::{
    to_interval_series, Interval, IntervalError, IntervalType, TimestampedPoint,
};
use crate::manifest::{DatasetManifest, ManifestError};
use crate::series::{
    merge, MergePolicy, Observation, SeriesContext, SeriesError, TimeSeries, Value,
};
use crate::temporal::{
    year_suggests_buddhist, Calendar, CanonicalTimestamp, Precision, TemporalError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("row {row}, column {column:?}: {source}")]
    Date {
        row: usize,
        column: String,
        source: TemporalError,
    },
    #[error("row {row}: {source}")]
    Location { row: usize, source: GeoError },
    #[error("row {row}: {cell:?} is neither a count nor a declared unknown marker")]
    Value { row: usize, cell: String },
    #[error("row {row}: {source}")]
    Calendar { row: usize, source: CalendarError },
    #[error("row {row}: {date} is not a report boundary; expected {expected}")]
    OffBoundary {
        row: usize,
        date: String,
        expected: String,
    },
    #[error("row {row}: case_type is not declared in the manifest")]
    MissingCaseType { row: usize },
    #[error("series {context}: {source}")]
    Interval {
        context: String,
        source: IntervalError,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("metadata disagree on {0}")]
    MetadataConflict(&'static str),
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub document: CanonicalDocument,
    /// Non-fatal observations about the source, for standard error.
    pub warnings: Vec<String>,
}

/// Runs decode, container, date, location and interval stages and returns
/// a sorted canonical document.
pub fn normalize(
    bytes: &[u8],
    source: &str,
    manifest: &DatasetManifest,
    gazetteer: &Gazetteer,
) -> Result<Normalized, PipelineError> {
    let decoded = detect_and_decode(bytes, manifest.encoding)?;
    let mut warnings = decoding_warnings(&decoded);

    let mut document = if manifest.canonical {
        canonical_input(&decoded.text, manifest)?
    } else {
        let table = read_table(&decoded.text, source, manifest.container)?;
        from_table(&table, manifest, gazetteer, &mut warnings)?
    };
    if document.metadata.source.is_none() {
        document.metadata.source = Some(
            manifest
                .source
                .clone()
                .unwrap_or_else(|| source.to_string()),
        );
    }
    document.validate()?;
    Ok(Normalized { document, warnings })
}

pub fn read_table(
    text: &str,
    source: &str,
    kind: ContainerKind,
) -> Result<RawTable, ContainerError> {
    match kind {
        ContainerKind::Csv => read_csv(text, source),
        ContainerKind::Json => Ok(RawTable::from_records(read_json(text)?, source)),
    }
}

fn decoding_warnings(d: &DecodedText) -> Vec<String> {
    let mut w = Vec::new();
    if d.had_bom {
        w.push("byte-order mark removed".to_string());
    }
    if d.has_mixed_newlines() {
        w.push("mixed line endings normalized to LF".to_string());
    }
    w
}

fn canonical_input(
    text: &str,
    manifest: &DatasetManifest,
) -> Result<CanonicalDocument, PipelineError> {
    let mut doc = read_canonical(text, manifest.container)?;
    fill(
        &mut doc.metadata.interval_type,
        manifest.interval_type,
        "interval_type",
    )?;
    fill(
        &mut doc.metadata.case_definition,
        manifest.case_definition.clone(),
        "case_definition",
    )?;
    Ok(doc)
}

fn fill<T: PartialEq>(
    slot: &mut Option<T>,
    declared: Option<T>,
    name: &'static str,
) -> Result<(), PipelineError> {
    match (slot.as_ref(), declared) {
        (Some(have), Some(want)) if *have != want => Err(PipelineError::MetadataConflict(name)),
        (None, want) => {
            *slot = want;
            Ok(())
        }
        _ => Ok(()),
    }
}

struct Columns {
    date: usize,
    /// `None` when the manifest fixes the location.
    location: Option<usize>,
    value: usize,
    demographic: Option<usize>,
}

fn columns(table: &RawTable, m: &DatasetManifest) -> Result<Columns, PipelineError> {
    let find = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| PipelineError::MissingColumn(name.to_string()))
    };
    Ok(Columns {
        date: find(&m.date_column)?,
        location: match m.location {
            Some(_) => None,
            None => Some(find(&m.location_column)?),
        },
        value: find(&m.value_column)?,
        demographic: m.demographic_column.as_deref().map(find).transpose()?,
    })
}

/// Where a row's date cell places it in time.
enum When {
    Point(CanonicalTimestamp),
    Interval(Interval),
}

fn from_table(
    table: &RawTable,
    m: &DatasetManifest,
    gazetteer: &Gazetteer,
    warnings: &mut Vec<String>,
) -> Result<CanonicalDocument, PipelineError> {
    let interval_type = m.require_interval_type()?;
    let parser = m.date_parser()?;
    let zone = m.zone()?;
    let cols = columns(table, m)?;
    let case_type = m.case_type.clone();

    let mut groups: BTreeMap<SeriesContext, Vec<(usize, When, Value)>> = BTreeMap::new();
    let mut unzoned = false;
    let mut suspicious_years = 0usize;
    for (i, row) in table.rows.iter().enumerate() {
        let row_no = i + 1;
        let date_cell = row[cols.date].trim();
        let when =
            match m
                .week_system()
                .and_then(|s| EpiWeek::parse_label(date_cell, s).ok())
            {
                Some(week) => When::Interval(week_interval(&week).map_err(|source| {
                    PipelineError::Calendar {
                        row: row_no,
                        source,
                    }
                })?),
                None => {
                    let ts = parser
                        .parse(date_cell)
                        .map_err(|source| PipelineError::Date {
                            row: row_no,
                            column: m.date_column.clone(),
                            source,
                        })?;
                    let ts = if ts.zone().is_known() {
                        ts
                    } else {
                        ts.with_zone(zone)
                    };
                    unzoned |= ts.precision() != Precision::Day && !ts.zone().is_known();
                    if year_suggests_buddhist(&ts) {
                        suspicious_years += 1;
                    }
                    When::Point(ts)
                }
            };
        let as_of = match &when {
            When::Point(ts) => ts.date(),
            When::Interval(iv) => iv.start().date(),
        };
        let name = match (cols.location, &m.location) {
            (Some(c), _) => row[c].as_str(),
            (None, fixed) => fixed.as_deref().unwrap_or_default(),
        };
        let location =
            gazetteer
                .resolve(name, Some(as_of))
                .map_err(|source| PipelineError::Location {
                    row: row_no,
                    source,
                })?;
        let cell = row[cols.value].trim();
        let value = if m.is_unknown_marker(cell) {
            Value::Unknown
        } else {
            parse_value_cell(cell).ok_or_else(|| PipelineError::Value {
                row: row_no,
                cell: cell.to_string(),
            })?
        };
        let demographic = match cols.demographic {
            Some(c) => row[c].trim().to_string(),
            None => m.fixed_demographic().to_string(),
        };
        let context = SeriesContext::new(
            location.code.clone(),
            demographic,
            case_type
                .clone()
                .ok_or(PipelineError::MissingCaseType { row: row_no })?,
        );
        groups
            .entry(context)
            .or_default()
            .push((row_no, when, value));
    }
    if unzoned {
        warnings.push("sub-day timestamps have no zone and none is declared".to_string());
    }
    if suspicious_years > 0 {
        warnings.push(format!(
            "{suspicious_years} date(s) have years past 2400; the source may use the Buddhist calendar"
        ));
    }

    let mut observations = Vec::new();
    for (context, rows) in groups {
        let points = place_rows(&context, rows, interval_type, m)?;
        let series = TimeSeries::new(context, points)?;
        observations.extend(series.observations());
    }
    for o in &mut observations {
        o.interval = with_calendar(o.interval, m.calendar);
    }

    Ok(CanonicalDocument {
        metadata: DocumentMetadata {
            interval_type: Some(interval_type),
            case_definition: m.case_definition.clone(),
            calendar: m.calendar,
            zone,
            source: m.source.clone(),
        },
        observations,
    })
}

fn with_calendar(iv: Interval, calendar: Calendar) -> Interval {
    Interval::new(
        iv.start().with_calendar(calendar),
        iv.end().with_calendar(calendar),
    )
    .expect("provenance does not move endpoints")
}

/// Turns one context's rows into intervals, by week system when declared
/// and by interval semantics otherwise.
fn place_rows(
    context: &SeriesContext,
    rows: Vec<(usize, When, Value)>,
    itype: IntervalType,
    m: &DatasetManifest,
) -> Result<Vec<(Interval, Value)>, PipelineError> {
    let calendar_based = m.week_system.is_some();
    let mut placed = Vec::new();
    let mut points = Vec::new();
    for (row, when, value) in rows {
        match when {
            When::Interval(iv) => placed.push((iv, value)),
            When::Point(ts) if calendar_based => {
                placed.push((report_period(row, &ts, itype, m)?, value))
            }
            When::Point(ts) => points.push(TimestampedPoint::new(ts, value)),
        }
    }
    if !points.is_empty() {
        points.sort_by_key(|p| p.timestamp);
        let series =
            to_interval_series(&points, itype, m.period()?, m.granule()?).map_err(|source| {
                PipelineError::Interval {
                    context: context.to_string(),
                    source,
                }
            })?;
        placed.extend(series);
    }
    Ok(placed)
}

/// The week or monthly report period a labeled timestamp names. The
/// timestamp must sit on the boundary its interval type implies.
fn report_period(
    row: usize,
    ts: &CanonicalTimestamp,
    itype: IntervalType,
    m: &DatasetManifest,
) -> Result<Interval, PipelineError> {
    let day = TimeDelta::days(1);
    let date = ts.date();
    let anchor = match itype {
        IntervalType::TrailingExclusive => date - day,
        IntervalType::Leading | IntervalType::TrailingInclusive => date,
    };
    let calendar_err = |source| PipelineError::Calendar { row, source };
    let period = match (m.week_system(), m.report_scheme()) {
        (Some(system), _) => {
            week_interval(&week_of(anchor, system).map_err(calendar_err)?).map_err(calendar_err)?
        }
        (None, Some(scheme)) => report_range_of(anchor, &scheme)
            .map_err(calendar_err)?
            .1
            .to_interval(),
        (None, None) => unreachable!("only called with a week system"),
    };
    let expected = match itype {
        IntervalType::Leading => period.start().date(),
        IntervalType::TrailingExclusive => period.end().date(),
        IntervalType::TrailingInclusive => period.end().date() - day,
    };
    if ts.precision() != Precision::Day || date != expected {
        return Err(PipelineError::OffBoundary {
            row,
            date: ts.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(period)
}

/// Series-wise merge of two canonical documents; `b` is the newer source.
pub fn merge_documents(
    a: &CanonicalDocument,
    b: &CanonicalDocument,
    policy: MergePolicy,
) -> Result<CanonicalDocument, PipelineError> {
    let (ma, mb) = (&a.metadata, &b.metadata);
    if ma.interval_type != mb.interval_type {
        return Err(PipelineError::MetadataConflict("interval_type"));
    }
    if ma.case_definition != mb.case_definition {
        return Err(PipelineError::MetadataConflict("case_definition"));
    }
    if ma.calendar != mb.calendar {
        return Err(PipelineError::MetadataConflict("calendar"));
    }
    let left = a.by_context();
    let right = b.by_context();
    let mut observations: Vec<Observation> = Vec::new();
    let mut contexts: Vec<&SeriesContext> = left.keys().chain(right.keys()).collect();
    contexts.sort();
    contexts.dedup();
    for ctx in contexts {
        let side = |m: &BTreeMap<SeriesContext, Vec<(Interval, Value)>>| {
            TimeSeries::new(ctx.clone(), m.get(ctx).cloned().unwrap_or_default())
        };
        observations.extend(merge(&side(&left)?, &side(&right)?, policy)?.observations());
    }
    let mut metadata = ma.clone();
    if ma.zone != mb.zone {
        metadata.zone = Default::default();
    }
    if ma.source != mb.source {
        metadata.source = match (&ma.source, &mb.source) {
            (Some(x), Some(y)) => Some(format!("{x}; {y}")),
            (x, y) => x.clone().or_else(|| y.clone()),
        };
    }
    Ok(CanonicalDocument {
        metadata,
        observations,
    })
}
