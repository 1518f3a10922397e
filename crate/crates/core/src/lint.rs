//! Best-practice checks over a dataset and its manifest.
//!
//! Data problems become findings; only an invalid manifest is an error.
//! Every row is checked independently, so appending a bad row can only add
//! findings.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::containers::{
    read_json, split_preamble, ContainerKind, DocumentMetadata, CANONICAL_HEADER,
};
use crate::encoding::detect_and_decode;
use crate::geo::Gazetteer;
use crate::manifest::{DatasetManifest, ManifestError};
use crate::temporal::{parse_iso8601, Precision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Utf8,
    Iso8601,
    Tz,
    Interval,
    Iso3166,
    CaseDef,
    Unknown,
    /// The container itself could not be read.
    Container,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        RuleId::Utf8,
        RuleId::Iso8601,
        RuleId::Tz,
        RuleId::Interval,
        RuleId::Iso3166,
        RuleId::CaseDef,
        RuleId::Unknown,
        RuleId::Container,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Utf8 => "R-UTF8",
            RuleId::Iso8601 => "R-ISO8601",
            RuleId::Tz => "R-TZ",
            RuleId::Interval => "R-INTERVAL",
            RuleId::Iso3166 => "R-ISO3166",
            RuleId::CaseDef => "R-CASEDEF",
            RuleId::Unknown => "R-UNKNOWN",
            RuleId::Container => "R-CONTAINER",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            RuleId::Tz => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for RuleId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// Where a finding applies. `line` is a physical line of the input; `row`
/// is a 1-based data row, not counting the header.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Locus {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.file)?;
        if let Some(l) = self.line {
            write!(f, ":line {l}")?;
        }
        if let Some(r) = self.row {
            write!(f, ":row {r}")?;
        }
        if let Some(c) = &self.column {
            write!(f, ":{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub rule: RuleId,
    pub severity: Severity,
    pub locus: Locus,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub errors: usize,
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LintReport {
    pub findings: Vec<Finding>,
    pub summary: Summary,
}

impl LintReport {
    fn new(mut findings: Vec<Finding>) -> Self {
        findings
            .sort_by(|a, b| (&a.locus, a.rule, &a.message).cmp(&(&b.locus, b.rule, &b.message)));
        let errors = findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .count();
        let summary = Summary {
            errors,
            warnings: findings.len() - errors,
        };
        Self { findings, summary }
    }

    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    /// 0 when clean, 1 for warnings only, 2 when any error was found.
    pub fn exit_code(&self) -> i32 {
        if self.summary.errors > 0 {
            2
        } else if self.summary.warnings > 0 {
            1
        } else {
            0
        }
    }

    pub fn rules(&self) -> Vec<RuleId> {
        self.findings.iter().map(|f| f.rule).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        if self.findings.is_empty() {
            return "no findings\n".to_string();
        }
        let loci: Vec<String> = self.findings.iter().map(|f| f.locus.to_string()).collect();
        let width = loci
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max("LOCUS".len());
        let mut out = format!(
            "{:<11} {:<8} {:<width$} MESSAGE\n",
            "RULE", "SEVERITY", "LOCUS"
        );
        for (f, locus) in self.findings.iter().zip(&loci) {
            let _ = writeln!(
                out,
                "{:<11} {:<8} {:<width$} {}",
                f.rule.as_str(),
                f.severity.to_string(),
                locus,
                f.message
            );
        }
        let _ = writeln!(
            out,
            "{} error(s), {} warning(s)",
            self.summary.errors, self.summary.warnings
        );
        out
    }
}

/// Checks datasets against one manifest and gazetteer.
pub struct Linter<'a> {
    manifest: &'a DatasetManifest,
    gazetteer: &'a Gazetteer,
}

struct Table {
    header: Vec<String>,
    /// Data rows with their 1-based row numbers; ragged rows are absent.
    rows: Vec<(usize, Vec<String>)>,
}

impl<'a> Linter<'a> {
    pub fn new(
        manifest: &'a DatasetManifest,
        gazetteer: &'a Gazetteer,
    ) -> Result<Self, ManifestError> {
        manifest.validate()?;
        Ok(Self {
            manifest,
            gazetteer,
        })
    }

    pub fn lint(&self, bytes: &[u8], file: &str) -> LintReport {
        let mut findings = Vec::new();
        let at = |line: Option<usize>, row: Option<usize>, column: Option<&str>| Locus {
            file: file.to_string(),
            line,
            row,
            column: column.map(str::to_string),
        };
        let mut push = |rule: RuleId, locus: Locus, message: String| {
            findings.push(Finding {
                rule,
                severity: rule.severity(),
                locus,
                message,
            })
        };

        let body = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
        for (i, line) in body.split(|&b| b == b'\n').enumerate() {
            if let Err(e) = std::str::from_utf8(line) {
                push(
                    RuleId::Utf8,
                    at(Some(i + 1), None, None),
                    format!(
                        "invalid UTF-8 byte 0x{:02X} at column {}",
                        line[e.valid_up_to()],
                        e.valid_up_to() + 1
                    ),
                );
            }
        }

        let text = match detect_and_decode(bytes, self.manifest.encoding) {
            Ok(d) => d.text,
            Err(e) => {
                // A failed UTF-8 declaration is already reported line by line.
                if self.manifest.encoding != Some(crate::encoding::Encoding::Utf8) {
                    push(RuleId::Container, at(None, None, None), e.to_string());
                }
                detect_and_decode(bytes, None)
                    .expect("detection always decodes")
                    .text
            }
        };

        let m = self.manifest;
        let parsed = if m.canonical {
            canonical_table(&text, m.container)
        } else {
            plain_table(&text, m.container).map(|t| (DocumentMetadata::default(), t))
        };
        let (metadata, table) = match parsed {
            Ok(p) => (p.0, Some(p.1)),
            Err(msg) => (DocumentMetadata::default(), {
                push(RuleId::Container, at(None, None, None), msg);
                None
            }),
        };

        if m.interval_type.is_none() && metadata.interval_type.is_none() {
            push(
                RuleId::Interval,
                at(None, None, None),
                "interval type is not declared".into(),
            );
        }
        let case_definition = m
            .case_definition
            .as_ref()
            .or(metadata.case_definition.as_ref());
        if case_definition.is_none_or(|c| c.trim().is_empty()) {
            push(
                RuleId::CaseDef,
                at(None, None, None),
                "case definition is missing or empty".into(),
            );
        }

        let Some(table) = table else {
            return LintReport::new(findings);
        };
        for (row, ragged) in ragged_rows(&text, m, &table) {
            push(RuleId::Container, at(None, Some(row), None), ragged);
        }

        let (date_columns, location_column, value_column): (Vec<&str>, &str, &str) = if m.canonical
        {
            (
                vec![CANONICAL_HEADER[0], CANONICAL_HEADER[1]],
                CANONICAL_HEADER[2],
                CANONICAL_HEADER[5],
            )
        } else {
            (
                vec![m.date_column.as_str()],
                m.location_column.as_str(),
                m.value_column.as_str(),
            )
        };
        let index = |name: &str| table.header.iter().position(|h| h == name);
        let mut resolve_column = |name: &str| {
            let i = index(name);
            if i.is_none() {
                push(
                    RuleId::Container,
                    at(None, None, Some(name)),
                    format!("column {name:?} not found"),
                );
            }
            i
        };
        let dates: Vec<(usize, &str)> = date_columns
            .iter()
            .filter_map(|c| resolve_column(c).map(|i| (i, *c)))
            .collect();
        let location = match (&m.location, m.canonical) {
            (Some(_), false) => None,
            _ => resolve_column(location_column),
        };
        let fixed_location = m.location.as_deref().filter(|_| !m.canonical);
        let value = resolve_column(value_column);

        for (row, cells) in &table.rows {
            let row = Some(*row);
            let mut first_date = None;
            for &(i, name) in &dates {
                let cell = cells[i].as_str();
                match parse_iso8601(cell) {
                    Ok(ts) => {
                        first_date.get_or_insert(ts.date());
                        if ts.precision() != Precision::Day && !ts.zone().is_known() {
                            push(
                                RuleId::Tz,
                                at(None, row, Some(name)),
                                format!("{cell:?} has a time of day but no zone or offset"),
                            );
                        }
                    }
                    Err(_) => push(
                        RuleId::Iso8601,
                        at(None, row, Some(name)),
                        format!("{cell:?} is not an ISO 8601 date"),
                    ),
                }
            }
            let place = match (location, fixed_location) {
                (Some(i), _) => Some((cells[i].as_str(), Some(location_column))),
                (None, Some(name)) => Some((name, None)),
                (None, None) => None,
            };
            if let Some((cell, column)) = place {
                let at_place = || at(None, row, column);
                match self.gazetteer.resolve(cell, first_date) {
                    Ok(loc) if loc.extension => push(
                        RuleId::Iso3166,
                        at_place(),
                        format!(
                            "{cell:?} resolves to {}, which is not an ISO 3166 code",
                            loc.code
                        ),
                    ),
                    Ok(loc) if m.canonical && loc.code != cell => push(
                        RuleId::Iso3166,
                        at_place(),
                        format!(
                            "{cell:?} is a name; canonical files carry the code {}",
                            loc.code
                        ),
                    ),
                    Ok(_) => {}
                    Err(e) => push(RuleId::Iso3166, at_place(), e.to_string()),
                }
            }
            if let Some(i) = value {
                let cell = cells[i].trim();
                let is_count = !cell.is_empty() && cell.bytes().all(|b| b.is_ascii_digit());
                if !is_count && !m.is_unknown_marker(cell) {
                    let what = if cell.is_empty() {
                        "empty count cell; mark unknowns explicitly".to_string()
                    } else {
                        format!("{cell:?} is neither a count nor a declared unknown marker")
                    };
                    push(RuleId::Unknown, at(None, row, Some(value_column)), what);
                }
            }
        }
        LintReport::new(findings)
    }
}

/// Convenience wrapper over [`Linter`].
pub fn lint(
    bytes: &[u8],
    file: &str,
    manifest: &DatasetManifest,
    gazetteer: &Gazetteer,
) -> Result<LintReport, ManifestError> {
    Ok(Linter::new(manifest, gazetteer)?.lint(bytes, file))
}

fn csv_table(text: &str) -> Result<Table, String> {
    if text.trim().is_empty() {
        return Err("input is empty".into());
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() == header.len() {
            rows.push((i + 1, record.iter().map(str::to_string).collect()));
        }
    }
    Ok(Table { header, rows })
}

/// Row numbers and messages for CSV rows whose width differs from the
/// header.
fn ragged_rows(text: &str, m: &DatasetManifest, table: &Table) -> Vec<(usize, String)> {
    if m.container != ContainerKind::Csv {
        return Vec::new();
    }
    let body = if m.canonical {
        split_preamble(text).map(|(_, b)| b).unwrap_or(text)
    } else {
        text
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(body.as_bytes());
    reader
        .records()
        .enumerate()
        .filter_map(|(i, r)| {
            let r = r.ok()?;
            (r.len() != table.header.len()).then(|| {
                (
                    i + 1,
                    format!(
                        "row has {} cells, header has {}",
                        r.len(),
                        table.header.len()
                    ),
                )
            })
        })
        .collect()
}

fn plain_table(text: &str, kind: ContainerKind) -> Result<Table, String> {
    match kind {
        ContainerKind::Csv => csv_table(text),
        ContainerKind::Json => {
            let records = read_json(text).map_err(|e| e.to_string())?;
            Ok(Table {
                header: vec!["date".into(), "location".into(), "cases".into()],
                rows: records
                    .into_iter()
                    .enumerate()
                    .map(|(i, r)| (i + 1, vec![r.date, r.location, r.count.to_string()]))
                    .collect(),
            })
        }
    }
}

fn canonical_table(text: &str, kind: ContainerKind) -> Result<(DocumentMetadata, Table), String> {
    match kind {
        ContainerKind::Csv => {
            let (meta, body) = split_preamble(text).map_err(|e| e.to_string())?;
            let table = csv_table(body)?;
            if table.header != CANONICAL_HEADER {
                return Err(format!("header must be {}", CANONICAL_HEADER.join(",")));
            }
            Ok((meta, table))
        }
        ContainerKind::Json => {
            let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
            let meta: DocumentMetadata = match doc.get("metadata") {
                Some(m) => {
                    serde_json::from_value(m.clone()).map_err(|e| format!("metadata: {e}"))?
                }
                None => return Err("missing \"metadata\"".into()),
            };
            let observations = doc
                .get("observations")
                .and_then(|o| o.as_array())
                .ok_or("\"observations\" must be an array")?;
            let rows = observations
                .iter()
                .enumerate()
                .map(|(i, o)| {
                    let cells = CANONICAL_HEADER
                        .iter()
                        .map(|k| match o.get(*k) {
                            None => String::new(),
                            Some(serde_json::Value::Null) => {
                                crate::series::Value::UNKNOWN_TOKEN.to_string()
                            }
                            Some(serde_json::Value::String(s)) => s.clone(),
                            Some(other) => other.to_string(),
                        })
                        .collect();
                    (i + 1, cells)
                })
                .collect();
            Ok((
                meta,
                Table {
                    header: CANONICAL_HEADER.iter().map(|s| s.to_string()).collect(),
                    rows,
                },
            ))
        }
    }
}
