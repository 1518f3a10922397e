//! Canonical observations, series merging and publication-dated revisions.
//!
//! `Value::Unknown` is a value, not an absence: it is never equal to zero,
//! never summed as zero, and never silently replaces a known count. An
//! interval that a report does not mention is simply absent.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::intervals::Interval;

pub const DEFAULT_DEMOGRAPHIC: &str = "all";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series contexts differ: {left} vs {right}")]
    ContextMismatch { left: String, right: String },
    #[error("conflicting values for {interval}: {left} vs {right}")]
    ConflictingValues {
        interval: String,
        left: Value,
        right: Value,
    },
    #[error("intervals overlap within a series: {first} and {second}")]
    OverlappingIntervals { first: String, second: String },
    #[error("no snapshot published on or before {0}")]
    NoSnapshotYet(NaiveDate),
    #[error("publication {date} is not after the latest snapshot {latest}")]
    OutOfOrderPublication { date: NaiveDate, latest: NaiveDate },
    #[error("revision range {from}..{to} is reversed")]
    ReversedRange { from: NaiveDate, to: NaiveDate },
    #[error("invalid case type {0:?}")]
    InvalidCaseType(String),
}

/// A case count or an explicit unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Count(u64),
    Unknown,
}

impl Value {
    pub const UNKNOWN_TOKEN: &'static str = "unknown";

    pub fn is_unknown(self) -> bool {
        self == Value::Unknown
    }

    pub fn count(self) -> Option<u64> {
        match self {
            Value::Count(n) => Some(n),
            Value::Unknown => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Count(n) => write!(f, "{n}"),
            Value::Unknown => f.write_str(Self::UNKNOWN_TOKEN),
        }
    }
}

/// Serialized as an integer, or `null` for unknown.
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Count(n) => s.serialize_u64(*n),
            Value::Unknown => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Option::<u64>::deserialize(d)? {
            Some(n) => Value::Count(n),
            None => Value::Unknown,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseType {
    Confirmed,
    Suspected,
    Hospitalizations,
    Deaths,
    /// A declared sum such as `confirmed+suspected`, compared verbatim.
    Combined(String),
}

impl fmt::Display for CaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseType::Confirmed => f.write_str("confirmed"),
            CaseType::Suspected => f.write_str("suspected"),
            CaseType::Hospitalizations => f.write_str("hospitalizations"),
            CaseType::Deaths => f.write_str("deaths"),
            CaseType::Combined(spec) => write!(f, "combined:{spec}"),
        }
    }
}

impl FromStr for CaseType {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "confirmed" => CaseType::Confirmed,
            "suspected" => CaseType::Suspected,
            "hospitalizations" => CaseType::Hospitalizations,
            "deaths" => CaseType::Deaths,
            other => match other.strip_prefix("combined:") {
                Some(spec) if !spec.is_empty() && !spec.contains(char::is_whitespace) => {
                    CaseType::Combined(spec.to_string())
                }
                _ => return Err(SeriesError::InvalidCaseType(s.to_string())),
            },
        })
    }
}

impl Serialize for CaseType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CaseType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// What a series is a series of: place × demographic × case type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeriesContext {
    pub location: String,
    pub demographic: String,
    pub case_type: CaseType,
}

impl SeriesContext {
    pub fn new(
        location: impl Into<String>,
        demographic: impl Into<String>,
        case_type: CaseType,
    ) -> Self {
        Self {
            location: location.into(),
            demographic: demographic.into(),
            case_type,
        }
    }
}

impl fmt::Display for SeriesContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}",
            self.location, self.demographic, self.case_type
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observation {
    pub interval: Interval,
    pub location: String,
    pub demographic: String,
    pub case_type: CaseType,
    pub value: Value,
}

impl Observation {
    pub fn context(&self) -> SeriesContext {
        SeriesContext::new(
            self.location.clone(),
            self.demographic.clone(),
            self.case_type.clone(),
        )
    }
}

/// Interval-ordered, non-overlapping values for one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeSeries {
    context: SeriesContext,
    points: Vec<(Interval, Value)>,
}

impl TimeSeries {
    pub fn new(
        context: SeriesContext,
        mut points: Vec<(Interval, Value)>,
    ) -> Result<Self, SeriesError> {
        points.sort_by_key(|p| p.0);
        if let Some(w) = points.windows(2).find(|w| w[0].0.overlaps(&w[1].0)) {
            return Err(SeriesError::OverlappingIntervals {
                first: w[0].0.to_string(),
                second: w[1].0.to_string(),
            });
        }
        Ok(Self { context, points })
    }

    pub fn context(&self) -> &SeriesContext {
        &self.context
    }

    pub fn points(&self) -> &[(Interval, Value)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, interval: &Interval) -> Option<Value> {
        self.points
            .binary_search_by(|(iv, _)| iv.cmp(interval))
            .ok()
            .map(|i| self.points[i].1)
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        self.points.iter().map(|(interval, value)| Observation {
            interval: *interval,
            location: self.context.location.clone(),
            demographic: self.context.demographic.clone(),
            case_type: self.context.case_type.clone(),
            value: *value,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergePolicy {
    /// The second (newer) series wins, except that unknown never replaces
    /// a known count.
    PreferNewer,
    /// Any differing values for the same interval are an error.
    ErrorOnConflict,
}

impl FromStr for MergePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "prefer_newer" => Ok(MergePolicy::PreferNewer),
            "error_on_conflict" => Ok(MergePolicy::ErrorOnConflict),
            _ => Err(format!("unknown merge policy {s:?}")),
        }
    }
}

/// Settles one interval present in both series; `newer` comes from `b`.
pub fn resolve_conflict(
    interval: &Interval,
    older: Value,
    newer: Value,
    policy: MergePolicy,
) -> Result<Value, SeriesError> {
    if older == newer {
        return Ok(older);
    }
    match (policy, older, newer) {
        (MergePolicy::PreferNewer, _, Value::Count(_)) => Ok(newer),
        (MergePolicy::PreferNewer, Value::Count(_), Value::Unknown) => Ok(older),
        _ => Err(SeriesError::ConflictingValues {
            interval: interval.to_string(),
            left: older,
            right: newer,
        }),
    }
}

/// Union of `a` and `b`, with `b` treated as the newer source.
pub fn merge(
    a: &TimeSeries,
    b: &TimeSeries,
    policy: MergePolicy,
) -> Result<TimeSeries, SeriesError> {
    if a.context != b.context {
        return Err(SeriesError::ContextMismatch {
            left: a.context.to_string(),
            right: b.context.to_string(),
        });
    }
    let mut cells: BTreeMap<Interval, Value> = a.points.iter().copied().collect();
    for &(interval, newer) in &b.points {
        let merged = match cells.get(&interval) {
            Some(&older) => resolve_conflict(&interval, older, newer, policy)?,
            None => newer,
        };
        cells.insert(interval, merged);
    }
    TimeSeries::new(a.context.clone(), cells.into_iter().collect())
}

/// A snapshot that can be compared cell by cell across revisions.
pub trait Snapshot {
    type Key: Ord + Clone + fmt::Debug;

    fn cells(&self) -> BTreeMap<Self::Key, Value>;

    /// Whether `next` may follow `self` in the same revision history.
    fn compatible(&self, _next: &Self) -> Result<(), SeriesError> {
        Ok(())
    }
}

impl Snapshot for TimeSeries {
    type Key = Interval;

    fn cells(&self) -> BTreeMap<Interval, Value> {
        self.points.iter().copied().collect()
    }

    fn compatible(&self, next: &Self) -> Result<(), SeriesError> {
        if self.context == next.context {
            Ok(())
        } else {
            Err(SeriesError::ContextMismatch {
                left: self.context.to_string(),
                right: next.context.to_string(),
            })
        }
    }
}

/// Append-only full snapshots keyed by publication date.
#[derive(Debug, Clone, PartialEq)]
pub struct RevisionedSeries<S = TimeSeries> {
    snapshots: BTreeMap<NaiveDate, S>,
}

impl<S> Default for RevisionedSeries<S> {
    fn default() -> Self {
        Self {
            snapshots: BTreeMap::new(),
        }
    }
}

impl<S: Snapshot> RevisionedSeries<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a snapshot. Publication dates must strictly increase.
    pub fn record(&mut self, published: NaiveDate, snapshot: S) -> Result<(), SeriesError> {
        if let Some((&latest, last)) = self.snapshots.last_key_value() {
            if published <= latest {
                return Err(SeriesError::OutOfOrderPublication {
                    date: published,
                    latest,
                });
            }
            last.compatible(&snapshot)?;
        }
        self.snapshots.insert(published, snapshot);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn publications(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.snapshots.keys().copied()
    }

    pub fn snapshots(&self) -> impl Iterator<Item = (NaiveDate, &S)> {
        self.snapshots.iter().map(|(d, s)| (*d, s))
    }

    /// The latest snapshot published on or before `date`, with its
    /// publication date.
    pub fn as_of(&self, date: NaiveDate) -> Result<(NaiveDate, &S), SeriesError> {
        self.snapshots
            .range(..=date)
            .next_back()
            .map(|(d, s)| (*d, s))
            .ok_or(SeriesError::NoSnapshotYet(date))
    }

    /// Every cell whose value changed, appeared or disappeared between the
    /// views as of `from` and as of `to`.
    pub fn revision_diff(
        &self,
        from: NaiveDate,
        to: NaiveDate,
    ) -> Result<Vec<RevisionChange<S::Key>>, SeriesError> {
        if from > to {
            return Err(SeriesError::ReversedRange { from, to });
        }
        let (_, old) = self.as_of(from)?;
        let (_, new) = self.as_of(to)?;
        Ok(diff_cells(&old.cells(), &new.cells()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevisionChange<K> {
    pub key: K,
    /// `None` when the cell first appears.
    pub old: Option<Value>,
    /// `None` when the cell was retracted.
    pub new: Option<Value>,
}

pub fn diff_cells<K: Ord + Clone>(
    old: &BTreeMap<K, Value>,
    new: &BTreeMap<K, Value>,
) -> Vec<RevisionChange<K>> {
    let mut keys: Vec<&K> = old.keys().chain(new.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter_map(|k| {
            let (o, n) = (old.get(k).copied(), new.get(k).copied());
            (o != n).then(|| RevisionChange {
                key: k.clone(),
                old: o,
                new: n,
            })
        })
        .collect()
}
