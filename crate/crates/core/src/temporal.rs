//! Date and time parsing under locale and calendar conventions.
//!
//! Every accepted string becomes a [`CanonicalTimestamp`]: a proleptic
//! Gregorian date, an optional time of day at the precision the source
//! actually gave, and a zone that is explicitly `Unknown` when the source
//! did not state one. Non-ISO numeric dates are only accepted under an
//! explicit [`LocaleHint`] or a declared [`DatePattern`]; nothing is guessed.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime, TimeDelta, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Offset between Thai solar (Buddhist Era) years and Gregorian years.
pub const BUDDHIST_ERA_OFFSET: i32 = 543;

/// Gregorian years past this are far more likely to be Buddhist Era years.
const BUDDHIST_SUSPECT_YEAR: i32 = 2400;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemporalError {
    #[error("{text:?} is ambiguous: could be {first} or {second}; declare a date order")]
    AmbiguousDate {
        text: String,
        first: NaiveDate,
        second: NaiveDate,
    },
    #[error("{0:?} is not an ISO 8601 date; declare a locale date order to parse it")]
    LocaleHintRequired(String),
    #[error("invalid date or time in {0:?}")]
    InvalidDate(String),
    #[error("two-digit year in {0:?}; declare a pattern with a century base")]
    TwoDigitYear(String),
    #[error("cannot parse {0:?} as a date")]
    UnparseableText(String),
    #[error("invalid date pattern {pattern:?}: {reason}")]
    BadPattern { pattern: String, reason: String },
    #[error("{0:?} is not a valid zone; expected Z, UTC or a numeric offset like +09:00")]
    BadZone(String),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub enum Zone {
    #[default]
    Unknown,
    Utc,
    /// Seconds east of UTC.
    Offset(i32),
}

impl Zone {
    pub fn is_known(self) -> bool {
        self != Zone::Unknown
    }

    fn offset_seconds(self) -> i32 {
        match self {
            Zone::Unknown | Zone::Utc => 0,
            Zone::Offset(s) => s,
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Zone::Unknown => Ok(()),
            Zone::Utc => f.write_str("Z"),
            Zone::Offset(secs) => {
                let sign = if secs < 0 { '-' } else { '+' };
                let abs = secs.unsigned_abs();
                write!(f, "{sign}{:02}:{:02}", abs / 3600, (abs % 3600) / 60)
            }
        }
    }
}

impl FromStr for Zone {
    type Err = TemporalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("utc") {
            return Ok(Zone::Utc);
        }
        let mut cur = Cursor::new(t);
        match cur.zone() {
            Some(z) if cur.at_end() && z.is_known() => Ok(z),
            _ => Err(TemporalError::BadZone(s.to_string())),
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Calendar {
    #[default]
    Gregorian,
    Buddhist,
}

impl Calendar {
    fn to_gregorian_year(self, year: i32) -> i32 {
        match self {
            Calendar::Gregorian => year,
            Calendar::Buddhist => year - BUDDHIST_ERA_OFFSET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Day,
    Hour,
    Minute,
    Second,
}

impl Precision {
    fn unit_seconds(self) -> i64 {
        match self {
            Precision::Day => 86_400,
            Precision::Hour => 3_600,
            Precision::Minute => 60,
            Precision::Second => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DateOrder {
    Dmy,
    Mdy,
    Ymd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    H12,
    H24,
}

/// Locale conventions for non-ISO dates. Every field must be stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocaleHint {
    pub date_order: DateOrder,
    pub clock: Clock,
    pub calendar: Calendar,
}

impl LocaleHint {
    pub fn new(date_order: DateOrder, clock: Clock, calendar: Calendar) -> Self {
        Self {
            date_order,
            clock,
            calendar,
        }
    }
}

/// A parsed, unambiguous point in time.
///
/// Day-precision values carry no time of day and never a zone: a calendar
/// date has no offset in ISO 8601. Sub-day values keep exactly the fields
/// the source supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CanonicalTimestamp {
    date: NaiveDate,
    time: Option<NaiveTime>,
    zone: Zone,
    calendar: Calendar,
    precision: Precision,
}

impl CanonicalTimestamp {
    pub fn from_date(date: NaiveDate) -> Self {
        Self {
            date,
            time: None,
            zone: Zone::Unknown,
            calendar: Calendar::Gregorian,
            precision: Precision::Day,
        }
    }

    /// Builds a sub-day timestamp. Returns `None` if `precision` is `Day` or
    /// `time` has components finer than `precision`.
    pub fn from_datetime(
        date: NaiveDate,
        time: NaiveTime,
        precision: Precision,
        zone: Zone,
    ) -> Option<Self> {
        let ok = match precision {
            Precision::Day => false,
            Precision::Hour => time.minute() == 0 && time.second() == 0,
            Precision::Minute => time.second() == 0,
            Precision::Second => true,
        };
        (ok && time.nanosecond() == 0).then_some(Self {
            date,
            time: Some(time),
            zone,
            calendar: Calendar::Gregorian,
            precision,
        })
    }

    pub fn with_calendar(mut self, calendar: Calendar) -> Self {
        self.calendar = calendar;
        self
    }

    /// Attaches `zone` to a sub-day timestamp. Day-precision values are
    /// returned unchanged.
    pub fn with_zone(mut self, zone: Zone) -> Self {
        if self.precision != Precision::Day {
            self.zone = zone;
        }
        self
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn time(&self) -> Option<NaiveTime> {
        self.time
    }

    pub fn zone(&self) -> Zone {
        self.zone
    }

    pub fn calendar(&self) -> Calendar {
        self.calendar
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Wall-clock reading, midnight for day-precision values.
    pub fn naive(&self) -> NaiveDateTime {
        self.date.and_time(self.time.unwrap_or(NaiveTime::MIN))
    }

    /// Instant used for ordering: shifted to UTC when the zone is known,
    /// otherwise the wall-clock reading.
    pub fn instant_key(&self) -> NaiveDateTime {
        self.naive() - TimeDelta::seconds(i64::from(self.zone.offset_seconds()))
    }

    /// Adds `delta`, keeping precision, zone and calendar. Fails when
    /// `delta` is not a whole multiple of the precision unit.
    pub fn checked_add(&self, delta: TimeDelta) -> Option<Self> {
        if delta.subsec_nanos() != 0 || delta.num_seconds() % self.precision.unit_seconds() != 0 {
            return None;
        }
        let shifted = self.naive().checked_add_signed(delta)?;
        if !(1..=9999).contains(&shifted.year()) {
            return None;
        }
        Some(Self {
            date: shifted.date(),
            time: self.time.map(|_| shifted.time()),
            ..*self
        })
    }

    pub fn checked_sub(&self, delta: TimeDelta) -> Option<Self> {
        self.checked_add(-delta)
    }
}

impl Ord for CanonicalTimestamp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.instant_key()
            .cmp(&other.instant_key())
            .then(self.precision.cmp(&other.precision))
            .then(self.zone.cmp(&other.zone))
            .then(self.calendar.cmp(&other.calendar))
    }
}

impl PartialOrd for CanonicalTimestamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CanonicalTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_iso8601(self))
    }
}

/// Renders `ts` at its stored precision. An offset is appended only when
/// the zone is known.
pub fn format_iso8601(ts: &CanonicalTimestamp) -> String {
    let mut out = ts.date.format("%Y-%m-%d").to_string();
    if let Some(t) = ts.time {
        match ts.precision {
            Precision::Day => {}
            Precision::Hour => out.push_str(&format!("T{:02}", t.hour())),
            Precision::Minute => out.push_str(&format!("T{:02}:{:02}", t.hour(), t.minute())),
            Precision::Second => out.push_str(&format!(
                "T{:02}:{:02}:{:02}",
                t.hour(),
                t.minute(),
                t.second()
            )),
        }
        out.push_str(&ts.zone.to_string());
    }
    out
}

/// True for Gregorian timestamps whose year looks like a Buddhist Era year.
/// Callers surface this as a warning; it is never applied automatically.
pub fn year_suggests_buddhist(ts: &CanonicalTimestamp) -> bool {
    ts.calendar == Calendar::Gregorian && ts.date.year() > BUDDHIST_SUSPECT_YEAR
}

/// Parses an ISO 8601 date or date-time, or a numeric locale date when a
/// hint is given.
pub fn parse_date(
    text: &str,
    hint: Option<&LocaleHint>,
) -> Result<CanonicalTimestamp, TemporalError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(TemporalError::UnparseableText(text.to_string()));
    }
    let calendar = hint.map(|h| h.calendar).unwrap_or_default();

    if let Some(ts) = parse_iso(trimmed, calendar)? {
        return Ok(ts);
    }

    let fields = split_numeric_date(trimmed)
        .ok_or_else(|| TemporalError::UnparseableText(text.to_string()))?;
    let hint = match hint {
        Some(h) => h,
        None => return Err(hintless_error(trimmed, &fields)),
    };

    let (y, m, d) = match hint.date_order {
        DateOrder::Ymd => (&fields.parts[0], &fields.parts[1], &fields.parts[2]),
        DateOrder::Mdy => (&fields.parts[2], &fields.parts[0], &fields.parts[1]),
        DateOrder::Dmy => (&fields.parts[2], &fields.parts[1], &fields.parts[0]),
    };
    if y.len() != 4 || m.len() > 2 || d.len() > 2 {
        return Err(if y.len() == 2 {
            TemporalError::TwoDigitYear(text.to_string())
        } else {
            TemporalError::UnparseableText(text.to_string())
        });
    }
    let year = calendar.to_gregorian_year(num(y));
    let date = gregorian_date(year, num(m), num(d))
        .ok_or_else(|| TemporalError::InvalidDate(text.to_string()))?;

    let mut cur = Cursor::new(fields.rest);
    cur.skip_spaces();
    if cur.at_end() {
        return Ok(CanonicalTimestamp::from_date(date).with_calendar(calendar));
    }
    let ts = parse_locale_time(&mut cur, date, hint.clock)
        .ok_or_else(|| TemporalError::UnparseableText(text.to_string()))?
        .map_err(|_| TemporalError::InvalidDate(text.to_string()))?;
    Ok(ts.with_calendar(calendar))
}

/// Accepts only ISO 8601 text, with no locale fallback. Years are read as
/// Gregorian.
pub fn parse_iso8601(text: &str) -> Result<CanonicalTimestamp, TemporalError> {
    parse_iso8601_in(text, Calendar::Gregorian)
}

/// As [`parse_iso8601`], reading the year in `calendar`.
pub fn parse_iso8601_in(
    text: &str,
    calendar: Calendar,
) -> Result<CanonicalTimestamp, TemporalError> {
    let trimmed = text.trim();
    parse_iso(trimmed, calendar)?
        .filter(|_| !trimmed.is_empty())
        .ok_or_else(|| TemporalError::UnparseableText(text.to_string()))
}

fn hintless_error(text: &str, fields: &NumericDate<'_>) -> TemporalError {
    let [a, b, c] = &fields.parts;
    if !fields.parts.iter().any(|p| p.len() == 4) {
        return TemporalError::TwoDigitYear(text.to_string());
    }
    if c.len() == 4 && a.len() <= 2 && b.len() <= 2 {
        let year = num(c);
        let mdy = gregorian_date(year, num(a), num(b));
        let dmy = gregorian_date(year, num(b), num(a));
        if let (Some(first), Some(second)) = (mdy, dmy) {
            if first != second {
                return TemporalError::AmbiguousDate {
                    text: text.to_string(),
                    first,
                    second,
                };
            }
        }
    }
    TemporalError::LocaleHintRequired(text.to_string())
}

fn gregorian_date(year: i32, month: u32, day: u32) -> Option<NaiveDate> {
    if !(1..=9999).contains(&year) {
        return None;
    }
    NaiveDate::from_ymd_opt(year, month, day)
}

fn num<T: FromStr>(digits: &str) -> T
where
    T::Err: fmt::Debug,
{
    digits.parse().expect("digit run fits the target integer")
}

struct NumericDate<'a> {
    parts: [&'a str; 3],
    rest: &'a str,
}

/// Splits a leading `a<sep>b<sep>c` run of digit groups, where `<sep>` is
/// one of `-`, `/` or `.` and used consistently.
fn split_numeric_date(text: &str) -> Option<NumericDate<'_>> {
    let mut cur = Cursor::new(text);
    let a = cur.digits(1, 4)?;
    let sep = cur.peek().filter(|c| matches!(c, '-' | '/' | '.'))?;
    cur.bump();
    let b = cur.digits(1, 2)?;
    cur.eat(sep).then_some(())?;
    let c = cur.digits(1, 4)?;
    if cur.peek().is_some_and(|c| c.is_ascii_digit()) {
        return None;
    }
    Some(NumericDate {
        parts: [a, b, c],
        rest: cur.rest(),
    })
}

/// Strict ISO 8601 subset: `YYYY-MM-DD`, optionally followed by `T` or a
/// space and `hh`, `hh:mm` or `hh:mm:ss`, optionally followed by `Z` or a
/// numeric offset. Returns `Ok(None)` when `text` is not ISO-shaped at all.
fn parse_iso(text: &str, calendar: Calendar) -> Result<Option<CanonicalTimestamp>, TemporalError> {
    let mut cur = Cursor::new(text);
    let (Some(y), true, Some(m), true, Some(d)) = (
        cur.exact_digits(4),
        cur.eat('-'),
        cur.exact_digits(2),
        cur.eat('-'),
        cur.exact_digits(2),
    ) else {
        return Ok(None);
    };
    if cur.peek().is_some_and(|c| c.is_ascii_digit()) {
        return Ok(None);
    }
    let invalid = || TemporalError::InvalidDate(text.to_string());
    let date =
        gregorian_date(calendar.to_gregorian_year(num(y)), num(m), num(d)).ok_or_else(invalid)?;
    if cur.at_end() {
        return Ok(Some(
            CanonicalTimestamp::from_date(date).with_calendar(calendar),
        ));
    }
    if !(cur.eat('T') || cur.eat(' ')) {
        return Ok(None);
    }
    let Some(h) = cur.exact_digits(2) else {
        return Ok(None);
    };
    let mut minute = None;
    let mut second = None;
    if cur.eat(':') {
        minute = Some(
            cur.exact_digits(2)
                .ok_or_else(|| TemporalError::UnparseableText(text.to_string()))?,
        );
        if cur.eat(':') {
            second = Some(
                cur.exact_digits(2)
                    .ok_or_else(|| TemporalError::UnparseableText(text.to_string()))?,
            );
        }
    }
    let zone = if cur.at_end() {
        Zone::Unknown
    } else {
        cur.zone()
            .ok_or_else(|| TemporalError::UnparseableText(text.to_string()))?
    };
    if !cur.at_end() {
        return Err(TemporalError::UnparseableText(text.to_string()));
    }
    let precision = match (minute, second) {
        (None, _) => Precision::Hour,
        (Some(_), None) => Precision::Minute,
        (Some(_), Some(_)) => Precision::Second,
    };
    let time = NaiveTime::from_hms_opt(
        num(h),
        minute.map(num).unwrap_or(0),
        second.map(num).unwrap_or(0),
    )
    .ok_or_else(invalid)?;
    let ts = CanonicalTimestamp::from_datetime(date, time, precision, zone).ok_or_else(invalid)?;
    Ok(Some(ts.with_calendar(calendar)))
}

/// `hh[:mm[:ss]]` with an AM/PM marker under a 12-hour clock, then an
/// optional zone. Outer `None` means unparseable, inner `Err` invalid.
fn parse_locale_time(
    cur: &mut Cursor<'_>,
    date: NaiveDate,
    clock: Clock,
) -> Option<Result<CanonicalTimestamp, ()>> {
    if !cur.eat('T') {
        cur.skip_spaces();
    }
    let h: u32 = num(cur.digits(1, 2)?);
    let mut minute = None;
    let mut second = None;
    if cur.eat(':') {
        minute = Some(num::<u32>(cur.exact_digits(2)?));
        if cur.eat(':') {
            second = Some(num::<u32>(cur.exact_digits(2)?));
        }
    }
    cur.skip_spaces();
    let meridiem = cur.meridiem();
    let hour = match (clock, meridiem) {
        (Clock::H24, None) => h,
        (Clock::H12, Some(pm)) => {
            if !(1..=12).contains(&h) {
                return Some(Err(()));
            }
            (h % 12) + if pm { 12 } else { 0 }
        }
        _ => return None,
    };
    cur.skip_spaces();
    let zone = if cur.at_end() {
        Zone::Unknown
    } else {
        cur.zone()?
    };
    if !cur.at_end() {
        return None;
    }
    let precision = match (minute, second) {
        (None, _) => Precision::Hour,
        (Some(_), None) => Precision::Minute,
        (Some(_), Some(_)) => Precision::Second,
    };
    let Some(time) = NaiveTime::from_hms_opt(hour, minute.unwrap_or(0), second.unwrap_or(0)) else {
        return Some(Err(()));
    };
    Some(CanonicalTimestamp::from_datetime(date, time, precision, zone).ok_or(()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PatternToken {
    Year4,
    Year2,
    Month,
    Day,
    Hour24,
    Hour12,
    Minute,
    Second,
    Meridiem,
    Literal(char),
}

/// A declared date layout such as `MM/DD/YY` or `DD.MM.YYYY HH:mm`.
///
/// Tokens: `YYYY`, `YY`, `MM`/`M`, `DD`/`D`, `HH`/`H` (24-hour),
/// `hh`/`h` (12-hour), `mm`, `ss`, `A` (AM/PM). Everything else matches
/// literally. Month, day, hour, minute and second accept one or two digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatePattern {
    source: String,
    tokens: Vec<PatternToken>,
    two_digit_year_base: Option<i32>,
}

impl DatePattern {
    pub fn new(pattern: &str, two_digit_year_base: Option<i32>) -> Result<Self, TemporalError> {
        let bad = |reason: &str| TemporalError::BadPattern {
            pattern: pattern.to_string(),
            reason: reason.to_string(),
        };
        let mut tokens = Vec::new();
        let mut rest = pattern;
        const TABLE: &[(&str, PatternToken)] = &[
            ("YYYY", PatternToken::Year4),
            ("YY", PatternToken::Year2),
            ("MM", PatternToken::Month),
            ("M", PatternToken::Month),
            ("DD", PatternToken::Day),
            ("D", PatternToken::Day),
            ("HH", PatternToken::Hour24),
            ("H", PatternToken::Hour24),
            ("hh", PatternToken::Hour12),
            ("h", PatternToken::Hour12),
            ("mm", PatternToken::Minute),
            ("ss", PatternToken::Second),
            ("A", PatternToken::Meridiem),
        ];
        'outer: while !rest.is_empty() {
            for (lit, tok) in TABLE {
                if let Some(r) = rest.strip_prefix(lit) {
                    tokens.push(tok.clone());
                    rest = r;
                    continue 'outer;
                }
            }
            let c = rest.chars().next().expect("non-empty");
            tokens.push(PatternToken::Literal(c));
            rest = &rest[c.len_utf8()..];
        }
        let count = |t: &PatternToken| tokens.iter().filter(|x| *x == t).count();
        let years = count(&PatternToken::Year4) + count(&PatternToken::Year2);
        if years != 1 || count(&PatternToken::Month) != 1 || count(&PatternToken::Day) != 1 {
            return Err(bad("needs exactly one year, month and day field"));
        }
        if count(&PatternToken::Year2) == 1 && two_digit_year_base.is_none() {
            return Err(bad("two-digit year needs a century base"));
        }
        let h12 = count(&PatternToken::Hour12);
        let h24 = count(&PatternToken::Hour24);
        if h12 + h24 > 1 || (h12 == 1) != (count(&PatternToken::Meridiem) == 1) {
            return Err(bad("12-hour fields need exactly one AM/PM marker"));
        }
        if h12 + h24 == 0 && (count(&PatternToken::Minute) + count(&PatternToken::Second)) > 0 {
            return Err(bad("minutes or seconds without an hour field"));
        }
        if count(&PatternToken::Second) > 0 && count(&PatternToken::Minute) == 0 {
            return Err(bad("seconds without minutes"));
        }
        Ok(Self {
            source: pattern.to_string(),
            tokens,
            two_digit_year_base,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn parse(
        &self,
        text: &str,
        calendar: Calendar,
    ) -> Result<CanonicalTimestamp, TemporalError> {
        let unparseable = || TemporalError::UnparseableText(text.to_string());
        let invalid = || TemporalError::InvalidDate(text.to_string());
        let mut cur = Cursor::new(text.trim());
        let (mut year, mut month, mut day) = (0i32, 0u32, 0u32);
        let (mut hour, mut minute, mut second) = (None::<u32>, None::<u32>, None::<u32>);
        let mut pm = None;
        for tok in &self.tokens {
            match tok {
                PatternToken::Year4 => year = num(cur.exact_digits(4).ok_or_else(unparseable)?),
                PatternToken::Year2 => {
                    let base = self.two_digit_year_base.expect("checked at construction");
                    year = base + num::<i32>(cur.exact_digits(2).ok_or_else(unparseable)?);
                }
                PatternToken::Month => month = num(cur.digits(1, 2).ok_or_else(unparseable)?),
                PatternToken::Day => day = num(cur.digits(1, 2).ok_or_else(unparseable)?),
                PatternToken::Hour24 | PatternToken::Hour12 => {
                    hour = Some(num(cur.digits(1, 2).ok_or_else(unparseable)?))
                }
                PatternToken::Minute => {
                    minute = Some(num(cur.digits(1, 2).ok_or_else(unparseable)?))
                }
                PatternToken::Second => {
                    second = Some(num(cur.digits(1, 2).ok_or_else(unparseable)?))
                }
                PatternToken::Meridiem => pm = Some(cur.meridiem().ok_or_else(unparseable)?),
                PatternToken::Literal(c) => {
                    if !cur.eat(*c) {
                        return Err(unparseable());
                    }
                }
            }
        }
        if !cur.at_end() {
            return Err(unparseable());
        }
        let date =
            gregorian_date(calendar.to_gregorian_year(year), month, day).ok_or_else(invalid)?;
        let Some(h) = hour else {
            return Ok(CanonicalTimestamp::from_date(date).with_calendar(calendar));
        };
        let h = match pm {
            Some(is_pm) if (1..=12).contains(&h) => (h % 12) + if is_pm { 12 } else { 0 },
            Some(_) => return Err(invalid()),
            None => h,
        };
        let precision = match (minute, second) {
            (None, _) => Precision::Hour,
            (Some(_), None) => Precision::Minute,
            (Some(_), Some(_)) => Precision::Second,
        };
        let time = NaiveTime::from_hms_opt(h, minute.unwrap_or(0), second.unwrap_or(0))
            .ok_or_else(invalid)?;
        let ts = CanonicalTimestamp::from_datetime(date, time, precision, Zone::Unknown)
            .ok_or_else(invalid)?;
        Ok(ts.with_calendar(calendar))
    }
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Self { s, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos == self.s.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn skip_spaces(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    /// Between `min` and `max` ASCII digits, greedily.
    fn digits(&mut self, min: usize, max: usize) -> Option<&'a str> {
        let rest = self.rest();
        let n = rest
            .bytes()
            .take(max)
            .take_while(u8::is_ascii_digit)
            .count();
        if n < min {
            return None;
        }
        self.pos += n;
        Some(&rest[..n])
    }

    fn exact_digits(&mut self, n: usize) -> Option<&'a str> {
        let start = self.pos;
        let d = self.digits(n, n)?;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos = start;
            return None;
        }
        Some(d)
    }

    /// `AM`/`PM` in either case, optionally dotted. Returns true for PM.
    fn meridiem(&mut self) -> Option<bool> {
        let rest = self.rest();
        for (lit, pm) in [("a.m.", false), ("p.m.", true), ("am", false), ("pm", true)] {
            if rest.len() >= lit.len() && rest[..lit.len()].eq_ignore_ascii_case(lit) {
                self.pos += lit.len();
                return Some(pm);
            }
        }
        None
    }

    /// `Z`, `+hh`, `+hhmm` or `+hh:mm` (and the `-` forms).
    fn zone(&mut self) -> Option<Zone> {
        if self.eat('Z') || self.eat('z') {
            return Some(Zone::Utc);
        }
        let sign = match self.peek()? {
            '+' => 1,
            '-' | '\u{2212}' => -1,
            _ => return None,
        };
        self.bump();
        let h: i32 = num(self.exact_digits(2).or_else(|| self.digits(2, 2))?);
        let m: i32 = if self.eat(':') {
            num(self.exact_digits(2)?)
        } else {
            self.digits(2, 2).map(num).unwrap_or(0)
        };
        if h > 23 || m > 59 {
            return None;
        }
        Some(Zone::Offset(sign * (h * 3600 + m * 60)))
    }
}
