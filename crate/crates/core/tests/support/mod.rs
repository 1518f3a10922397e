//! Independent oracles and generators shared by the integration targets.
#![allow(dead_code)]

use std::path::PathBuf;

use chrono::{Datelike, NaiveDate, NaiveTime, TimeDelta, Weekday};
use epinorm::containers::{CanonicalDocument, DocumentMetadata};
use epinorm::intervals::{Interval, IntervalType};
use epinorm::series::{CaseType, Observation, Value};
use epinorm::temporal::{Calendar, CanonicalTimestamp, Precision, Zone};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Sunday-start week numbering by walking days one at a time. A week is
/// week 1 of year Y when at least four of its seven days are among the
/// first seven days of January of Y; otherwise it continues the count.
pub struct SundayWeekWalk {
    day: NaiveDate,
    year: i32,
    week: u32,
}

impl SundayWeekWalk {
    /// Starts on the first week 1 found on or after `from`.
    pub fn starting_near(from: NaiveDate) -> Self {
        let mut day = from;
        loop {
            if day.weekday() == Weekday::Sun {
                if let Some(year) = january_majority(day) {
                    return Self { day, year, week: 1 };
                }
            }
            day = day.succ_opt().unwrap();
        }
    }

    pub fn current(&self) -> (NaiveDate, i32, u32) {
        (self.day, self.year, self.week)
    }

    pub fn advance(&mut self) {
        self.day = self.day.succ_opt().unwrap();
        if self.day.weekday() == Weekday::Sun {
            match january_majority(self.day) {
                Some(year) => {
                    self.year = year;
                    self.week = 1;
                }
                None => self.week += 1,
            }
        }
    }
}

fn january_majority(sunday: NaiveDate) -> Option<i32> {
    let days: Vec<NaiveDate> = (0..7).map(|i| sunday + TimeDelta::days(i)).collect();
    let january: Vec<&NaiveDate> = days
        .iter()
        .filter(|d| d.month() == 1 && d.day() <= 7)
        .collect();
    (january.len() >= 4).then(|| january[0].year())
}

/// Strictly increasing day-precision timestamps with gaps drawn from
/// `1..=max_gap` days.
pub fn increasing_days(
    max_len: usize,
    max_gap: i64,
) -> impl Strategy<Value = Vec<CanonicalTimestamp>> {
    (
        0i64..20_000,
        proptest::collection::vec(1..=max_gap, 1..=max_len),
    )
        .prop_map(|(offset, gaps)| {
            let mut day = ymd(1970, 1, 1) + TimeDelta::days(offset);
            gaps.into_iter()
                .map(|g| {
                    day += TimeDelta::days(g);
                    CanonicalTimestamp::from_date(day)
                })
                .collect()
        })
}

fn zone() -> impl Strategy<Value = Zone> {
    prop_oneof![
        Just(Zone::Unknown),
        Just(Zone::Utc),
        (-12i32..=14).prop_map(|h| Zone::Offset(h * 3600)),
        (-12i32..=14, prop_oneof![Just(30), Just(45)])
            .prop_map(|(h, m)| Zone::Offset(h * 3600 + h.signum() * m * 60)),
    ]
}

fn timestamp(calendar: Calendar) -> impl Strategy<Value = CanonicalTimestamp> {
    (0i64..60_000, 0u32..4, 0u32..24, 0u32..60, 0u32..60, zone()).prop_map(
        move |(offset, p, h, mi, s, z)| {
            let date = ymd(1900, 1, 1) + TimeDelta::days(offset);
            let ts = match p {
                0 => CanonicalTimestamp::from_date(date),
                1 => CanonicalTimestamp::from_datetime(
                    date,
                    NaiveTime::from_hms_opt(h, 0, 0).unwrap(),
                    Precision::Hour,
                    z,
                )
                .unwrap(),
                2 => CanonicalTimestamp::from_datetime(
                    date,
                    NaiveTime::from_hms_opt(h, mi, 0).unwrap(),
                    Precision::Minute,
                    z,
                )
                .unwrap(),
                _ => CanonicalTimestamp::from_datetime(
                    date,
                    NaiveTime::from_hms_opt(h, mi, s).unwrap(),
                    Precision::Second,
                    z,
                )
                .unwrap(),
            };
            ts.with_calendar(calendar)
        },
    )
}

fn interval(calendar: Calendar) -> impl Strategy<Value = Interval> {
    (timestamp(calendar), 1i64..400).prop_map(|(start, days)| {
        let end = start.checked_add(TimeDelta::days(days)).unwrap();
        Interval::new(start, end).unwrap()
    })
}

fn label() -> impl Strategy<Value = String> {
    "[A-Za-z0-9 ,\"'\\-+/é\n]{1,12}".prop_filter("non-empty", |s| !s.is_empty())
}

fn case_type() -> impl Strategy<Value = CaseType> {
    prop_oneof![
        Just(CaseType::Confirmed),
        Just(CaseType::Suspected),
        Just(CaseType::Hospitalizations),
        Just(CaseType::Deaths),
        "[a-z]{1,8}(\\+[a-z]{1,8}){0,2}".prop_map(CaseType::Combined),
    ]
}

fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Unknown),
        Just(Value::Count(0)),
        any::<u64>().prop_map(Value::Count),
        (0u64..1000).prop_map(Value::Count),
    ]
}

/// Arbitrary documents that satisfy the canonical invariants.
pub fn canonical_document() -> impl Strategy<Value = CanonicalDocument> {
    let calendar = prop_oneof![Just(Calendar::Gregorian), Just(Calendar::Buddhist)];
    let itype = prop_oneof![
        Just(IntervalType::Leading),
        Just(IntervalType::TrailingExclusive),
        Just(IntervalType::TrailingInclusive),
    ];
    (
        calendar,
        itype,
        "[^\u{0}\r]{1,40}".prop_filter("non-blank", |s| !s.trim().is_empty()),
        zone(),
        proptest::option::of("[^\r]{0,20}"),
    )
        .prop_flat_map(|(calendar, itype, case_definition, zone, source)| {
            let observation = (
                interval(calendar),
                prop_oneof![Just("US".to_string()), Just("CH-ZH".to_string()), label()],
                label(),
                case_type(),
                value(),
            )
                .prop_map(
                    |(interval, location, demographic, case_type, value)| Observation {
                        interval,
                        location,
                        demographic,
                        case_type,
                        value,
                    },
                );
            proptest::collection::vec(observation, 0..12).prop_map(move |observations| {
                CanonicalDocument {
                    metadata: DocumentMetadata {
                        interval_type: Some(itype),
                        case_definition: Some(case_definition.clone()),
                        calendar,
                        zone,
                        source: source.clone(),
                    },
                    observations,
                }
            })
        })
}
