//! Normalization of epidemiological case-count data.
//!
//! Raw files of many shapes go in: CSV or date-keyed JSON, in ASCII,
//! ISO-8859-1 or UTF-8, with locale dates, Buddhist Era years, bare
//! timestamps of undeclared meaning and place names in several spellings.
//! What comes out is a canonical document of observations, each with an
//! explicit half-open interval, an ISO 3166 code, a demographic, a case type
//! and a count or an explicit unknown.
//!
//! The per-source conventions live in a [`manifest::DatasetManifest`];
//! [`pipeline::normalize`] applies them and [`lint`] checks a file against
//! the publishing practices the canonical form is built around.

pub mod containers;
pub mod encoding;
pub mod epicalendar;
pub mod geo;
pub mod intervals;
pub mod lint;
pub mod manifest;
pub mod pipeline;
pub mod series;
pub mod store;
pub mod temporal;

pub use containers::{CanonicalDocument, ContainerKind};
pub use encoding::{detect_and_decode, Encoding};
pub use epicalendar::{week_of, EpiWeek, WeekSystem};
pub use geo::{Gazetteer, LocationRef};
pub use intervals::{from_interval_series, to_interval_series, Interval, IntervalType};
pub use lint::{LintReport, Linter};
pub use manifest::DatasetManifest;
pub use pipeline::normalize;
pub use series::{MergePolicy, Observation, RevisionedSeries, TimeSeries, Value};
pub use store::RevisionStore;
pub use temporal::{parse_date, CanonicalTimestamp};
