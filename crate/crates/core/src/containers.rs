//! CSV and JSON containers: raw tables in, canonical documents out.
//!
//! Canonical CSV carries its metadata as leading `# key=value` lines,
//! followed by the fixed header
//! `interval_start,interval_end,location_code,demographic,case_type,value`.
//! Canonical JSON is a flat `{"metadata": .., "observations": [..]}` object
//! where a `null` value means unknown.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intervals::{Interval, IntervalType};
use crate::series::{Observation, SeriesContext, Snapshot, Value};
use crate::temporal::{format_iso8601, parse_iso8601, Calendar, CanonicalTimestamp, Zone};

pub const CANONICAL_HEADER: [&str; 6] = [
    "interval_start",
    "interval_end",
    "location_code",
    "demographic",
    "case_type",
    "value",
];

const UNKNOWN_ZONE: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("input is empty")]
    EmptyInput,
    #[error("row {row} has {found} cells, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("unexpected document shape: {0}")]
    ShapeMismatch(String),
    #[error("metadata field {0} is missing or empty")]
    MissingMetadata(&'static str),
    #[error("observation {index}: {reason}")]
    InvalidObservation { index: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContainerKind {
    Csv,
    Json,
}

impl fmt::Display for ContainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContainerKind::Csv => "csv",
            ContainerKind::Json => "json",
        })
    }
}

impl FromStr for ContainerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ContainerKind::Csv),
            "json" => Ok(ContainerKind::Json),
            _ => Err(format!("unknown container {s:?}; expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub source: String,
    pub kind: ContainerKind,
}

/// Header plus rectangular rows of text cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub provenance: Provenance,
}

impl RawTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Lays out flattened JSON records as a `date,location,cases` table.
    /// Unknown counts become the literal `unknown`.
    pub fn from_records(records: Vec<JsonRecord>, source: &str) -> Self {
        RawTable {
            header: vec!["date".into(), "location".into(), "cases".into()],
            rows: records
                .into_iter()
                .map(|r| vec![r.date, r.location, r.count.to_string()])
                .collect(),
            provenance: Provenance {
                source: source.to_string(),
                kind: ContainerKind::Json,
            },
        }
    }
}

pub fn read_csv(text: &str, source: &str) -> Result<RawTable, ContainerError> {
    if text.trim().is_empty() {
        return Err(ContainerError::EmptyInput);
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| ContainerError::MalformedDocument(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ContainerError::MalformedDocument(e.to_string()))?;
        if record.len() != header.len() {
            return Err(ContainerError::RaggedRow {
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(RawTable {
        header,
        rows,
        provenance: Provenance {
            source: source.to_string(),
            kind: ContainerKind::Csv,
        },
    })
}

/// One (date, location, count) triple from a date-keyed JSON document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonRecord {
    pub date: String,
    pub location: String,
    pub count: Value,
}

/// Flattens `[{"date": .., "locations": {name: count, ..}}, ..]` in
/// document order. A `null` count is read as unknown.
pub fn read_json(text: &str) -> Result<Vec<JsonRecord>, ContainerError> {
    if text.trim().is_empty() {
        return Err(ContainerError::EmptyInput);
    }
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ContainerError::MalformedDocument(e.to_string()))?;
    let entries = doc
        .as_array()
        .ok_or_else(|| ContainerError::ShapeMismatch("top level must be an array".into()))?;
    let mut out = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let shape = |what: &str| ContainerError::ShapeMismatch(format!("entry {i}: {what}"));
        let date = entry
            .get("date")
            .and_then(|d| d.as_str())
            .ok_or_else(|| shape("\"date\" must be a string"))?;
        let locations = entry
            .get("locations")
            .and_then(|l| l.as_object())
            .ok_or_else(|| shape("\"locations\" must be an object"))?;
        for (name, count) in locations {
            let count = match count {
                serde_json::Value::Null => Value::Unknown,
                n => Value::Count(n.as_u64().ok_or_else(|| {
                    shape(&format!("count for {name:?} is not a non-negative integer"))
                })?),
            };
            out.push(JsonRecord {
                date: date.to_string(),
                location: name.clone(),
                count,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_type: Option<IntervalType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_definition: Option<String>,
    #[serde(default)]
    pub calendar: Calendar,
    /// Zone the source reports in; per-timestamp offsets live on the
    /// timestamps themselves.
    #[serde(default, with = "zone_text")]
    pub zone: Zone,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

fn zone_to_text(zone: Zone) -> String {
    if zone.is_known() {
        zone.to_string()
    } else {
        UNKNOWN_ZONE.to_string()
    }
}

fn zone_from_text(s: &str) -> Result<Zone, String> {
    if s == UNKNOWN_ZONE {
        Ok(Zone::Unknown)
    } else {
        s.parse()
            .map_err(|e: crate::temporal::TemporalError| e.to_string())
    }
}

mod zone_text {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(zone: &Zone, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&zone_to_text(*zone))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Zone, D::Error> {
        let text = String::deserialize(d)?;
        zone_from_text(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CanonicalDocument {
    pub metadata: DocumentMetadata,
    pub observations: Vec<Observation>,
}

impl CanonicalDocument {
    /// Observations grouped by series context, in context order.
    pub fn by_context(&self) -> BTreeMap<SeriesContext, Vec<(Interval, Value)>> {
        let mut groups: BTreeMap<SeriesContext, Vec<(Interval, Value)>> = BTreeMap::new();
        for o in &self.observations {
            groups
                .entry(o.context())
                .or_default()
                .push((o.interval, o.value));
        }
        groups
    }

    /// Checks what a written document must satisfy.
    pub fn validate(&self) -> Result<(), ContainerError> {
        if self.metadata.interval_type.is_none() {
            return Err(ContainerError::MissingMetadata("interval_type"));
        }
        if self
            .metadata
            .case_definition
            .as_deref()
            .is_none_or(|c| c.trim().is_empty())
        {
            return Err(ContainerError::MissingMetadata("case_definition"));
        }
        for (index, o) in self.observations.iter().enumerate() {
            let invalid = |reason: String| ContainerError::InvalidObservation { index, reason };
            if o.location.is_empty() || o.demographic.is_empty() {
                return Err(invalid("location and demographic must be non-empty".into()));
            }
            for ts in [o.interval.start(), o.interval.end()] {
                if ts.calendar() != self.metadata.calendar {
                    return Err(invalid(format!(
                        "timestamp {ts} has {:?} provenance but the document declares {:?}",
                        ts.calendar(),
                        self.metadata.calendar
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Snapshot for CanonicalDocument {
    type Key = (SeriesContext, Interval);

    fn cells(&self) -> BTreeMap<Self::Key, Value> {
        self.observations
            .iter()
            .map(|o| ((o.context(), o.interval), o.value))
            .collect()
    }
}

pub fn write_canonical(
    doc: &CanonicalDocument,
    kind: ContainerKind,
) -> Result<String, ContainerError> {
    doc.validate()?;
    Ok(match kind {
        ContainerKind::Csv => write_csv(doc),
        ContainerKind::Json => write_json(doc),
    })
}

pub fn read_canonical(
    text: &str,
    kind: ContainerKind,
) -> Result<CanonicalDocument, ContainerError> {
    match kind {
        ContainerKind::Csv => read_canonical_csv(text),
        ContainerKind::Json => read_canonical_json(text),
    }
}

fn write_csv(doc: &CanonicalDocument) -> String {
    let mut out = String::new();
    for (key, value) in metadata_pairs(&doc.metadata) {
        out.push_str(&format!("# {key}={}\n", escape_meta(&value)));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CANONICAL_HEADER).expect("write to memory");
    for o in &doc.observations {
        w.write_record([
            format_iso8601(&o.interval.start()),
            format_iso8601(&o.interval.end()),
            o.location.clone(),
            o.demographic.clone(),
            o.case_type.to_string(),
            o.value.to_string(),
        ])
        .expect("write to memory");
    }
    let body = w.into_inner().expect("flush to memory");
    out.push_str(std::str::from_utf8(&body).expect("csv of UTF-8 fields is UTF-8"));
    out
}

fn metadata_pairs(m: &DocumentMetadata) -> Vec<(&'static str, String)> {
    let mut pairs = Vec::new();
    if let Some(t) = m.interval_type {
        pairs.push(("interval_type", t.to_string()));
    }
    if let Some(c) = &m.case_definition {
        pairs.push(("case_definition", c.clone()));
    }
    pairs.push((
        "calendar",
        match m.calendar {
            Calendar::Gregorian => "gregorian".into(),
            Calendar::Buddhist => "buddhist".into(),
        },
    ));
    pairs.push(("zone", zone_to_text(m.zone)));
    if let Some(s) = &m.source {
        pairs.push(("source", s.clone()));
    }
    pairs
}

fn escape_meta(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_meta(s: &str) -> Result<String, ContainerError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(ContainerError::MalformedDocument(format!(
                    "bad escape \\{} in metadata",
                    other.map(String::from).unwrap_or_default()
                )))
            }
        }
    }
    Ok(out)
}

/// Splits leading `# key=value` lines off canonical CSV text.
pub fn split_preamble(text: &str) -> Result<(DocumentMetadata, &str), ContainerError> {
    let mut meta = DocumentMetadata::default();
    let mut rest = text;
    while let Some(line_body) = rest.strip_prefix("# ") {
        let (line, tail) = line_body.split_once('\n').unwrap_or((line_body, ""));
        rest = tail;
        let (key, raw) = line.split_once('=').ok_or_else(|| {
            ContainerError::MalformedDocument(format!("metadata line without '=': {line:?}"))
        })?;
        let value = unescape_meta(raw)?;
        let bad =
            |what: String| ContainerError::MalformedDocument(format!("metadata {key}: {what}"));
        match key {
            "interval_type" => {
                meta.interval_type = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "case_definition" => meta.case_definition = Some(value),
            "calendar" => {
                meta.calendar = match value.as_str() {
                    "gregorian" => Calendar::Gregorian,
                    "buddhist" => Calendar::Buddhist,
                    other => return Err(bad(format!("unknown calendar {other:?}"))),
                }
            }
            "zone" => meta.zone = zone_from_text(&value).map_err(bad)?,
            "source" => meta.source = Some(value),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok((meta, rest))
}

fn read_canonical_csv(text: &str) -> Result<CanonicalDocument, ContainerError> {
    let (metadata, body) = split_preamble(text)?;
    let table = read_csv(body, "")?;
    if table.header != CANONICAL_HEADER {
        return Err(ContainerError::ShapeMismatch(format!(
            "header must be {}",
            CANONICAL_HEADER.join(",")
        )));
    }
    let observations = table
        .rows
        .iter()
        .enumerate()
        .map(|(index, row)| {
            observation_from_cells(
                [&row[0], &row[1], &row[2], &row[3], &row[4]],
                parse_value_cell(&row[5]),
                metadata.calendar,
            )
            .map_err(|reason| ContainerError::InvalidObservation { index, reason })
        })
        .collect::<Result<_, _>>()?;
    Ok(CanonicalDocument {
        metadata,
        observations,
    })
}

/// Parses the canonical value cell: a non-negative integer or `unknown`.
pub fn parse_value_cell(cell: &str) -> Option<Value> {
    if cell == Value::UNKNOWN_TOKEN {
        return Some(Value::Unknown);
    }
    if !cell.is_empty() && cell.bytes().all(|b| b.is_ascii_digit()) {
        return cell.parse().ok().map(Value::Count);
    }
    None
}

fn observation_from_cells(
    [start, end, location, demographic, case_type]: [&str; 5],
    value: Option<Value>,
    calendar: Calendar,
) -> Result<Observation, String> {
    let ts = |s: &str| -> Result<CanonicalTimestamp, String> {
        parse_iso8601(s)
            .map(|t| t.with_calendar(calendar))
            .map_err(|e| e.to_string())
    };
    let interval = Interval::new(ts(start)?, ts(end)?).map_err(|e| e.to_string())?;
    if location.is_empty() || demographic.is_empty() {
        return Err("location and demographic must be non-empty".into());
    }
    Ok(Observation {
        interval,
        location: location.to_string(),
        demographic: demographic.to_string(),
        case_type: case_type.parse().map_err(|e| format!("{e}"))?,
        value: value.ok_or("value must be a non-negative integer or \"unknown\"")?,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDocument {
    metadata: DocumentMetadata,
    observations: Vec<JsonObservation>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonObservation {
    interval_start: String,
    interval_end: String,
    location_code: String,
    demographic: String,
    case_type: String,
    value: Value,
}

fn write_json(doc: &CanonicalDocument) -> String {
    let out = JsonDocument {
        metadata: doc.metadata.clone(),
        observations: doc
            .observations
            .iter()
            .map(|o| JsonObservation {
                interval_start: format_iso8601(&o.interval.start()),
                interval_end: format_iso8601(&o.interval.end()),
                location_code: o.location.clone(),
                demographic: o.demographic.clone(),
                case_type: o.case_type.to_string(),
                value: o.value,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("plain data serializes");
    text.push('\n');
    text
}

fn read_canonical_json(text: &str) -> Result<CanonicalDocument, ContainerError> {
    if text.trim().is_empty() {
        return Err(ContainerError::EmptyInput);
    }
    let doc: JsonDocument = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            ContainerError::MalformedDocument(e.to_string())
        } else {
            ContainerError::ShapeMismatch(e.to_string())
        }
    })?;
    let calendar = doc.metadata.calendar;
    let observations = doc
        .observations
        .iter()
        .enumerate()
        .map(|(index, o)| {
            observation_from_cells(
                [
                    &o.interval_start,
                    &o.interval_end,
                    &o.location_code,
                    &o.demographic,
                    &o.case_type,
                ],
                Some(o.value),
                calendar,
            )
            .map_err(|reason| ContainerError::InvalidObservation { index, reason })
        })
        .collect::<Result<_, _>>()?;
    Ok(CanonicalDocument {
        metadata: doc.metadata,
        observations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::CaseType;
    use chrono::NaiveDate;

    const COUNTRIES: &str = "date,location,cases\n2013-11-05,United States,4\n2013-11-05,Germany,8\n2013-11-11,South Africa,9\n2013-11-12,Japan,6";

    fn day(y: i32, m: u32, d: u32) -> CanonicalTimestamp {
        CanonicalTimestamp::from_date(NaiveDate::from_ymd_opt(y, m, d).unwrap())
    }

    fn sample_doc() -> CanonicalDocument {
        CanonicalDocument {
            metadata: DocumentMetadata {
                interval_type: Some(IntervalType::Leading),
                case_definition: Some("lab-confirmed, per WHO 2016\nrevised".into()),
                calendar: Calendar::Gregorian,
                zone: Zone::Offset(3600),
                source: Some("ministry, bulletin 12".into()),
            },
            observations: vec![
                Observation {
                    interval: Interval::new(day(2013, 11, 5), day(2013, 11, 12)).unwrap(),
                    location: "US".into(),
                    demographic: "all".into(),
                    case_type: CaseType::Confirmed,
                    value: Value::Count(4),
                },
                Observation {
                    interval: Interval::new(day(2013, 11, 12), day(2013, 11, 19)).unwrap(),
                    location: "DE".into(),
                    demographic: "age 0-4, \"infants\"".into(),
                    case_type: CaseType::Combined("confirmed+suspected".into()),
                    value: Value::Unknown,
                },
            ],
        }
    }

    #[test]
    fn country_rows_csv() {
        let t = read_csv(COUNTRIES, "fig2").unwrap();
        assert_eq!(t.header, ["date", "location", "cases"]);
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[0], ["2013-11-05", "United States", "4"]);
        assert_eq!(t.provenance.kind, ContainerKind::Csv);
    }

    #[test]
    fn csv_edge_cases() {
        assert!(read_csv("a,b\n", "x").unwrap().rows.is_empty());
        assert_eq!(
            read_csv("a,b\n1\n", "x").unwrap_err(),
            ContainerError::RaggedRow {
                row: 1,
                expected: 2,
                found: 1
            }
        );
        assert_eq!(read_csv("", "x").unwrap_err(), ContainerError::EmptyInput);
        let t = read_csv("a,b\n\"x, y\",\"line\nbreak\"\n", "x").unwrap();
        assert_eq!(t.rows[0], ["x, y", "line\nbreak"]);
    }

    #[test]
    fn date_keyed_json() {
        let text = r#"[
  {"date":"2013-11-05","locations":{"United States":4,"Germany":8}},
  {"date":"2013-11-11","locations":{"South Africa":9}},
  {"date":"2013-11-12","locations":{"Japan":6}}
]"#;
        let recs = read_json(text).unwrap();
        let flat: Vec<_> = recs
            .iter()
            .map(|r| (r.date.as_str(), r.location.as_str(), r.count))
            .collect();
        assert_eq!(
            flat,
            [
                ("2013-11-05", "United States", Value::Count(4)),
                ("2013-11-05", "Germany", Value::Count(8)),
                ("2013-11-11", "South Africa", Value::Count(9)),
                ("2013-11-12", "Japan", Value::Count(6)),
            ]
        );
    }

    #[test]
    fn json_edge_cases() {
        assert!(read_json("[]").unwrap().is_empty());
        assert!(read_json(r#"[{"date":"2013-11-05","locations":{}}]"#)
            .unwrap()
            .is_empty());
        assert!(matches!(
            read_json("[{"),
            Err(ContainerError::MalformedDocument(_))
        ));
        assert!(matches!(
            read_json(r#"[{"locations":{}}]"#),
            Err(ContainerError::ShapeMismatch(_))
        ));
        assert!(matches!(
            read_json(r#"[{"date":"d","locations":{"X":1.5}}]"#),
            Err(ContainerError::ShapeMismatch(_))
        ));
        let recs = read_json(r#"[{"date":"d","locations":{"X":null}}]"#).unwrap();
        assert_eq!(recs[0].count, Value::Unknown);
    }

    #[test]
    fn singleton_csv_layout() {
        let mut doc = sample_doc();
        doc.observations.truncate(1);
        doc.metadata.case_definition = Some("confirmed".into());
        doc.metadata.source = None;
        doc.metadata.zone = Zone::Unknown;
        let text = write_canonical(&doc, ContainerKind::Csv).unwrap();
        assert_eq!(
            text,
            "# interval_type=leading\n# case_definition=confirmed\n# calendar=gregorian\n# zone=unknown\n\
             interval_start,interval_end,location_code,demographic,case_type,value\n\
             2013-11-05,2013-11-12,US,all,confirmed,4\n"
        );
    }

    #[test]
    fn round_trips() {
        let doc = sample_doc();
        for kind in [ContainerKind::Csv, ContainerKind::Json] {
            let text = write_canonical(&doc, kind).unwrap();
            assert_eq!(read_canonical(&text, kind).unwrap(), doc, "{kind}");
            assert_eq!(write_canonical(&doc, kind).unwrap(), text);
        }
    }

    #[test]
    fn json_unknown_is_null() {
        let text = write_canonical(&sample_doc(), ContainerKind::Json).unwrap();
        assert!(text.contains("\"value\": null"));
        assert!(text.contains("\"zone\": \"+01:00\""));
    }

    #[test]
    fn missing_metadata() {
        let mut doc = sample_doc();
        doc.metadata.case_definition = None;
        assert_eq!(
            write_canonical(&doc, ContainerKind::Csv).unwrap_err(),
            ContainerError::MissingMetadata("case_definition")
        );
        doc.metadata.case_definition = Some("  ".into());
        assert!(write_canonical(&doc, ContainerKind::Json).is_err());
        let mut doc = sample_doc();
        doc.metadata.interval_type = None;
        assert_eq!(
            write_canonical(&doc, ContainerKind::Json).unwrap_err(),
            ContainerError::MissingMetadata("interval_type")
        );
    }

    #[test]
    fn calendar_provenance_must_agree() {
        let mut doc = sample_doc();
        doc.metadata.calendar = Calendar::Buddhist;
        assert!(matches!(
            write_canonical(&doc, ContainerKind::Csv),
            Err(ContainerError::InvalidObservation { index: 0, .. })
        ));
    }

    #[test]
    fn canonical_reader_rejects_bad_cells() {
        let head = "interval_start,interval_end,location_code,demographic,case_type,value\n";
        for row in [
            "2013-11-05,2013-11-12,US,all,confirmed,\n",
            "2013-11-05,2013-11-12,US,all,confirmed,-1\n",
            "2013-11-12,2013-11-05,US,all,confirmed,1\n",
            "11/05/2013,2013-11-12,US,all,confirmed,1\n",
            "2013-11-05,2013-11-12,US,all,cases,1\n",
        ] {
            let text = format!("{head}{row}");
            assert!(
                matches!(
                    read_canonical(&text, ContainerKind::Csv),
                    Err(ContainerError::InvalidObservation { .. })
                ),
                "{row}"
            );
        }
        assert!(matches!(
            read_canonical("# colour=blue\n", ContainerKind::Csv),
            Err(ContainerError::MalformedDocument(_))
        ));
    }
}
