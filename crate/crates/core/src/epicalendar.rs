//! Epidemiological week systems and monthly report schemes.
//!
//! MMWR weeks run Sunday through Saturday. Week 1 of a year is the first
//! week holding at least four January days, i.e. the week that contains
//! January 4. Monday-start weeks use the same rule with Monday as the first
//! day. Years have 52 or 53 weeks.
//!
//! A [`MonthlyReportScheme`] splits each calendar month into four closed
//! day ranges regardless of month length.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, TimeDelta, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intervals::Interval;
use crate::temporal::CanonicalTimestamp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalendarError {
    #[error("week {week} does not exist in {system} year {year}")]
    NoSuchWeek {
        system: WeekSystem,
        year: i32,
        week: u32,
    },
    #[error("invalid month {year}-{month:02}")]
    InvalidMonth { year: i32, month: u32 },
    #[error("invalid monthly report scheme: {0}")]
    InvalidScheme(String),
    #[error("cannot parse week label {0:?}; expected \"YYYY, week WW\"")]
    BadLabel(String),
    #[error("date out of supported range")]
    OutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeekSystem {
    /// Sunday to Saturday (CDC MMWR weeks).
    Mmwr,
    /// Monday to Sunday.
    MondayStart,
}

impl WeekSystem {
    pub fn first_day(self) -> Weekday {
        match self {
            WeekSystem::Mmwr => Weekday::Sun,
            WeekSystem::MondayStart => Weekday::Mon,
        }
    }
}

impl fmt::Display for WeekSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeekSystem::Mmwr => "mmwr",
            WeekSystem::MondayStart => "monday_start",
        })
    }
}

impl FromStr for WeekSystem {
    type Err = CalendarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mmwr" => Ok(WeekSystem::Mmwr),
            "monday_start" | "monday" => Ok(WeekSystem::MondayStart),
            other => Err(CalendarError::InvalidScheme(format!(
                "unknown week system {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EpiWeek {
    pub system: WeekSystem,
    pub year: i32,
    pub week: u32,
}

impl EpiWeek {
    /// Checks the 1..=53 range only; whether week 53 exists in `year` is
    /// checked by [`week_interval`].
    pub fn new(system: WeekSystem, year: i32, week: u32) -> Result<Self, CalendarError> {
        if !(1..=53).contains(&week) {
            return Err(CalendarError::NoSuchWeek { system, year, week });
        }
        Ok(Self { system, year, week })
    }

    /// Renders as `"YYYY, week WW"`.
    pub fn label(&self) -> String {
        format!("{:04}, week {:02}", self.year, self.week)
    }

    /// Parses `"2016, week 20"` (case-insensitive, flexible spacing).
    pub fn parse_label(text: &str, system: WeekSystem) -> Result<Self, CalendarError> {
        let bad = || CalendarError::BadLabel(text.to_string());
        let (year, rest) = text.trim().split_once(',').ok_or_else(bad)?;
        let rest = rest.trim();
        let week = rest
            .get(..4)
            .filter(|w| w.eq_ignore_ascii_case("week"))
            .map(|_| rest[4..].trim())
            .ok_or_else(bad)?;
        let year: i32 = year.trim().parse().map_err(|_| bad())?;
        let week: u32 = week.parse().map_err(|_| bad())?;
        Self::new(system, year, week)
    }
}

impl fmt::Display for EpiWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn days_since_week_start(date: NaiveDate, system: WeekSystem) -> i64 {
    match system {
        WeekSystem::Mmwr => i64::from(date.weekday().num_days_from_sunday()),
        WeekSystem::MondayStart => i64::from(date.weekday().num_days_from_monday()),
    }
}

/// First day of week 1: the start of the week containing January 4.
fn week_one_start(year: i32, system: WeekSystem) -> Option<NaiveDate> {
    let jan4 = NaiveDate::from_ymd_opt(year, 1, 4)?;
    jan4.checked_sub_signed(TimeDelta::days(days_since_week_start(jan4, system)))
}

/// Number of weeks (52 or 53) in `year` under `system`.
pub fn weeks_in_year(year: i32, system: WeekSystem) -> Result<u32, CalendarError> {
    let this = week_one_start(year, system).ok_or(CalendarError::OutOfRange)?;
    let next = week_one_start(year + 1, system).ok_or(CalendarError::OutOfRange)?;
    Ok(((next - this).num_days() / 7) as u32)
}

/// The epi week containing `date`.
pub fn week_of(date: NaiveDate, system: WeekSystem) -> Result<EpiWeek, CalendarError> {
    let mut year = date.year();
    let mut start = week_one_start(year, system).ok_or(CalendarError::OutOfRange)?;
    if date < start {
        year -= 1;
        start = week_one_start(year, system).ok_or(CalendarError::OutOfRange)?;
    } else if let Some(next) = week_one_start(year + 1, system) {
        if date >= next {
            year += 1;
            start = next;
        }
    }
    let week = ((date - start).num_days() / 7) as u32 + 1;
    Ok(EpiWeek { system, year, week })
}

/// Week containing the date part of `ts`.
pub fn week_of_timestamp(
    ts: &CanonicalTimestamp,
    system: WeekSystem,
) -> Result<EpiWeek, CalendarError> {
    week_of(ts.date(), system)
}

/// First day of `week`.
pub fn week_start(week: &EpiWeek) -> Result<NaiveDate, CalendarError> {
    let no_such = || CalendarError::NoSuchWeek {
        system: week.system,
        year: week.year,
        week: week.week,
    };
    if week.week == 0 || week.week > weeks_in_year(week.year, week.system)? {
        return Err(no_such());
    }
    let w1 = week_one_start(week.year, week.system).ok_or(CalendarError::OutOfRange)?;
    Ok(w1 + TimeDelta::days(7 * i64::from(week.week - 1)))
}

/// The seven-day half-open interval of `week`, at day precision.
pub fn week_interval(week: &EpiWeek) -> Result<Interval, CalendarError> {
    let start = week_start(week)?;
    let end = start + TimeDelta::days(7);
    Ok(Interval::new(
        CanonicalTimestamp::from_date(start),
        CanonicalTimestamp::from_date(end),
    )
    .expect("seven-day interval is non-empty"))
}

/// A day-of-month cut in a [`MonthlyReportScheme`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MonthBoundary {
    /// Last day of a segment, as a day of month.
    Day(u32),
    /// The literal string `"end"`: last day of the month.
    EndOfMonth(EndMarker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndMarker {
    End,
}

/// Four closed segments per month, each ending on a boundary day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MonthBoundary>", into = "Vec<MonthBoundary>")]
pub struct MonthlyReportScheme {
    cuts: [u32; 3],
}

impl MonthlyReportScheme {
    /// Inner cuts are the last days of the first three segments. They must
    /// be strictly increasing and at most 27 so every month splits in four.
    pub fn new(cuts: [u32; 3]) -> Result<Self, CalendarError> {
        if cuts[0] == 0 || cuts[0] >= cuts[1] || cuts[1] >= cuts[2] || cuts[2] > 27 {
            return Err(CalendarError::InvalidScheme(format!(
                "cuts {cuts:?} must be strictly increasing within 1..=27"
            )));
        }
        Ok(Self { cuts })
    }

    pub fn cuts(&self) -> [u32; 3] {
        self.cuts
    }
}

impl Default for MonthlyReportScheme {
    fn default() -> Self {
        Self { cuts: [7, 15, 22] }
    }
}

impl TryFrom<Vec<MonthBoundary>> for MonthlyReportScheme {
    type Error = CalendarError;

    fn try_from(v: Vec<MonthBoundary>) -> Result<Self, Self::Error> {
        match v.as_slice() {
            [MonthBoundary::Day(a), MonthBoundary::Day(b), MonthBoundary::Day(c), MonthBoundary::EndOfMonth(_)] => {
                Self::new([*a, *b, *c])
            }
            _ => Err(CalendarError::InvalidScheme(
                "expected three day cuts followed by \"end\"".into(),
            )),
        }
    }
}

impl From<MonthlyReportScheme> for Vec<MonthBoundary> {
    fn from(s: MonthlyReportScheme) -> Self {
        let mut v: Vec<_> = s.cuts.iter().map(|&d| MonthBoundary::Day(d)).collect();
        v.push(MonthBoundary::EndOfMonth(EndMarker::End));
        v
    }
}

/// Closed range of whole days, `first..=last`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DateRange {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl DateRange {
    pub fn days(&self) -> i64 {
        (self.last - self.first).num_days() + 1
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.first <= d && d <= self.last
    }

    /// Same days as a half-open interval.
    pub fn to_interval(&self) -> Interval {
        Interval::new(
            CanonicalTimestamp::from_date(self.first),
            CanonicalTimestamp::from_date(self.last + TimeDelta::days(1)),
        )
        .expect("closed range holds at least one day")
    }
}

fn last_day_of_month(year: i32, month: u32) -> Option<NaiveDate> {
    let (ny, nm) = if month == 12 {
        (year + 1, 1)
    } else {
        (year, month + 1)
    };
    NaiveDate::from_ymd_opt(ny, nm, 1)?.pred_opt()
}

/// The four report ranges of `year`-`month`.
pub fn month_report_intervals(
    year: i32,
    month: u32,
    scheme: &MonthlyReportScheme,
) -> Result<[DateRange; 4], CalendarError> {
    let invalid = || CalendarError::InvalidMonth { year, month };
    let first = NaiveDate::from_ymd_opt(year, month, 1).ok_or_else(invalid)?;
    let last = last_day_of_month(year, month).ok_or_else(invalid)?;
    let day = |d: u32| first.with_day(d).expect("cut within every month");
    let [a, b, c] = scheme.cuts;
    Ok([
        DateRange {
            first,
            last: day(a),
        },
        DateRange {
            first: day(a + 1),
            last: day(b),
        },
        DateRange {
            first: day(b + 1),
            last: day(c),
        },
        DateRange {
            first: day(c + 1),
            last,
        },
    ])
}

/// The report range containing `date`, with its 1-based index in the month.
pub fn report_range_of(
    date: NaiveDate,
    scheme: &MonthlyReportScheme,
) -> Result<(usize, DateRange), CalendarError> {
    let ranges = month_report_intervals(date.year(), date.month(), scheme)?;
    let i = ranges
        .iter()
        .position(|r| r.contains(date))
        .expect("the four ranges cover the month");
    Ok((i + 1, ranges[i]))
}
