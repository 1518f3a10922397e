//! Per-source dataset manifests.
//!
//! A manifest declares every convention a source uses: container, encoding,
//! date layout, calendar, zone, interval semantics, week system, column
//! names and unknown markers. Unknown keys are rejected.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::TimeDelta;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::containers::ContainerKind;
use crate::encoding::Encoding;
use crate::epicalendar::{MonthlyReportScheme, WeekSystem};
use crate::geo::{Gazetteer, GeoError};
use crate::intervals::IntervalType;
use crate::series::{CaseType, DEFAULT_DEMOGRAPHIC};
use crate::temporal::{
    parse_date, parse_iso8601_in, Calendar, CanonicalTimestamp, Clock, DateOrder, DatePattern,
    LocaleHint, TemporalError, Zone,
};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest is not valid: {0}")]
    Parse(String),
    #[error("manifest is not valid: {0}")]
    Invalid(String),
    #[error("manifest does not declare interval_type")]
    MissingIntervalType,
    #[error("cannot load gazetteer: {0}")]
    Gazetteer(#[from] GeoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeekScheme {
    Mmwr,
    MondayStart,
    MonthlyScheme,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateFormat {
    /// `iso8601`, `locale`, or a token pattern such as `DD.MM.YYYY`.
    #[serde(default = "iso_pattern")]
    pub pattern: String,
    #[serde(default)]
    pub order: Option<DateOrder>,
    #[serde(default = "h24")]
    pub clock: Clock,
    #[serde(default)]
    pub two_digit_year_base: Option<i32>,
}

impl Default for DateFormat {
    fn default() -> Self {
        Self {
            pattern: iso_pattern(),
            order: None,
            clock: Clock::H24,
            two_digit_year_base: None,
        }
    }
}

fn iso_pattern() -> String {
    "iso8601".into()
}

fn h24() -> Clock {
    Clock::H24
}

fn default_date_column() -> String {
    "date".into()
}

fn default_location_column() -> String {
    "location".into()
}

fn default_value_column() -> String {
    "cases".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub container: ContainerKind,
    /// The input is already in canonical CSV or JSON form.
    #[serde(default)]
    pub canonical: bool,
    #[serde(
        default,
        deserialize_with = "de_encoding",
        skip_serializing_if = "Option::is_none"
    )]
    pub encoding: Option<Encoding>,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    #[serde(default)]
    pub date_format: DateFormat,
    #[serde(default)]
    pub calendar: Calendar,
    /// Zone for sub-day timestamps that carry no offset of their own.
    #[serde(default)]
    pub zone: Option<String>,
    #[serde(default)]
    pub interval_type: Option<IntervalType>,
    /// ISO 8601 duration such as `P7D`.
    #[serde(default)]
    pub period: Option<String>,
    #[serde(default)]
    pub granule: Option<String>,
    #[serde(default)]
    pub week_system: Option<WeekScheme>,
    #[serde(default)]
    pub monthly_scheme: Option<MonthlyReportScheme>,
    #[serde(default = "default_location_column")]
    pub location_column: String,
    /// One place for every row, in place of a location column.
    #[serde(default)]
    pub location: Option<String>,
    /// Relative paths are taken from the manifest's directory.
    #[serde(default)]
    pub gazetteer: Option<PathBuf>,
    #[serde(default = "default_value_column")]
    pub value_column: String,
    #[serde(default)]
    pub demographic: Option<String>,
    #[serde(default)]
    pub demographic_column: Option<String>,
    #[serde(default)]
    pub case_type: Option<CaseType>,
    #[serde(default)]
    pub case_definition: Option<String>,
    #[serde(default)]
    pub unknown_markers: BTreeSet<String>,
    #[serde(default)]
    pub source: Option<String>,
}

fn de_encoding<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Encoding>, D::Error> {
    Option::<String>::deserialize(d)?
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .transpose()
}

/// How date cells are turned into timestamps.
#[derive(Debug, Clone)]
pub enum DateParser {
    Iso(Calendar),
    Locale(LocaleHint),
    Pattern(DatePattern, Calendar),
}

impl DateParser {
    pub fn parse(&self, text: &str) -> Result<CanonicalTimestamp, TemporalError> {
        match self {
            DateParser::Iso(calendar) => parse_iso8601_in(text, *calendar),
            DateParser::Locale(hint) => parse_date(text, Some(hint)),
            DateParser::Pattern(pattern, calendar) => pattern.parse(text, *calendar),
        }
    }
}

impl DatasetManifest {
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let m: Self =
            serde_json::from_str(text).map_err(|e| ManifestError::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Reads and validates a manifest, resolving a relative gazetteer path
    /// against the manifest's directory.
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut m = Self::from_json(&text)?;
        if let (Some(g), Some(dir)) = (&m.gazetteer, path.parent()) {
            if g.is_relative() {
                m.gazetteer = Some(dir.join(g));
            }
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        let invalid = |msg: String| Err(ManifestError::Invalid(msg));
        if let Some(m) = self.unknown_markers.iter().find(|m| looks_numeric(m)) {
            return invalid(format!("unknown marker {m:?} is a number"));
        }
        if self.demographic.is_some() && self.demographic_column.is_some() {
            return invalid("set demographic or demographic_column, not both".into());
        }
        self.date_parser()?;
        self.zone()?;
        let granule = self.granule()?;
        if let Some(p) = self.period()? {
            if self.week_system.is_some() {
                return invalid("period and week_system are mutually exclusive".into());
            }
            if p <= TimeDelta::zero() {
                return invalid("period must be positive".into());
            }
        }
        if self.week_system.is_some() && granule != TimeDelta::days(1) {
            return invalid("week_system requires a granule of P1D".into());
        }
        if self.monthly_scheme.is_some() && self.week_system != Some(WeekScheme::MonthlyScheme) {
            return invalid("monthly_scheme is only used with week_system monthly_scheme".into());
        }
        Ok(())
    }

    pub fn require_interval_type(&self) -> Result<IntervalType, ManifestError> {
        self.interval_type.ok_or(ManifestError::MissingIntervalType)
    }

    pub fn date_parser(&self) -> Result<DateParser, ManifestError> {
        let f = &self.date_format;
        Ok(match f.pattern.as_str() {
            "iso8601" => DateParser::Iso(self.calendar),
            "locale" => {
                let order = f.order.ok_or_else(|| {
                    ManifestError::Invalid("locale date_format needs an order".into())
                })?;
                DateParser::Locale(LocaleHint::new(order, f.clock, self.calendar))
            }
            p => DateParser::Pattern(
                DatePattern::new(p, f.two_digit_year_base)
                    .map_err(|e| ManifestError::Invalid(e.to_string()))?,
                self.calendar,
            ),
        })
    }

    pub fn zone(&self) -> Result<Zone, ManifestError> {
        match &self.zone {
            None => Ok(Zone::Unknown),
            Some(z) => z
                .parse()
                .map_err(|e: TemporalError| ManifestError::Invalid(e.to_string())),
        }
    }

    pub fn period(&self) -> Result<Option<TimeDelta>, ManifestError> {
        self.period.as_deref().map(parse_duration).transpose()
    }

    pub fn granule(&self) -> Result<TimeDelta, ManifestError> {
        let g = self.granule.as_deref().map(parse_duration).transpose()?;
        match g {
            Some(g) if g <= TimeDelta::zero() => {
                Err(ManifestError::Invalid("granule must be positive".into()))
            }
            Some(g) => Ok(g),
            None => Ok(TimeDelta::days(1)),
        }
    }

    pub fn week_system(&self) -> Option<WeekSystem> {
        match self.week_system? {
            WeekScheme::Mmwr => Some(WeekSystem::Mmwr),
            WeekScheme::MondayStart => Some(WeekSystem::MondayStart),
            WeekScheme::MonthlyScheme => None,
        }
    }

    pub fn report_scheme(&self) -> Option<MonthlyReportScheme> {
        (self.week_system == Some(WeekScheme::MonthlyScheme))
            .then(|| self.monthly_scheme.clone().unwrap_or_default())
    }

    pub fn load_gazetteer(&self) -> Result<Gazetteer, ManifestError> {
        Ok(match &self.gazetteer {
            Some(path) => Gazetteer::load(path)?,
            None => Gazetteer::builtin(),
        })
    }

    pub fn fixed_demographic(&self) -> &str {
        self.demographic.as_deref().unwrap_or(DEFAULT_DEMOGRAPHIC)
    }

    /// True when `cell` is an explicit unknown: the canonical token or a
    /// declared marker.
    pub fn is_unknown_marker(&self, cell: &str) -> bool {
        cell == crate::series::Value::UNKNOWN_TOKEN || self.unknown_markers.contains(cell)
    }
}

fn looks_numeric(s: &str) -> bool {
    let t = s.trim();
    let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Parses the day-and-time subset of ISO 8601 durations: `PnW`, or
/// `PnD` with an optional `TnHnMnS` part. Years and months have no fixed
/// length and are rejected.
pub fn parse_duration(text: &str) -> Result<TimeDelta, ManifestError> {
    let bad = || ManifestError::Invalid(format!("{text:?} is not a supported ISO 8601 duration"));
    let body = text.strip_prefix('P').ok_or_else(bad)?;
    let (date_part, time_part) = match body.split_once('T') {
        Some((d, t)) if !t.is_empty() => (d, Some(t)),
        Some(_) => return Err(bad()),
        None => (body, None),
    };
    if date_part.is_empty() && time_part.is_none() {
        return Err(bad());
    }
    let mut total = 0i64;
    let mut fold = |part: &str, units: &[(char, i64)]| -> Result<(), ManifestError> {
        let mut rest = part;
        let mut last = usize::MAX;
        while !rest.is_empty() {
            let n_end = rest.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
            if n_end == 0 {
                return Err(bad());
            }
            let n: i64 = rest[..n_end].parse().map_err(|_| bad())?;
            let unit = rest[n_end..].chars().next().ok_or_else(bad)?;
            let idx = units.iter().position(|(u, _)| *u == unit).ok_or_else(bad)?;
            if last != usize::MAX && idx <= last {
                return Err(bad());
            }
            last = idx;
            total = n
                .checked_mul(units[idx].1)
                .and_then(|v| total.checked_add(v))
                .ok_or_else(bad)?;
            rest = &rest[n_end + unit.len_utf8()..];
        }
        Ok(())
    };
    fold(date_part, &[('W', 7 * 86_400), ('D', 86_400)])?;
    if let Some(t) = time_part {
        fold(t, &[('H', 3_600), ('M', 60), ('S', 1)])?;
    }
    TimeDelta::try_seconds(total).ok_or_else(bad)
}
