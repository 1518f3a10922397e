//! Timestamp ↔ explicit interval conversion.
//!
//! A reported timestamp stands for an interval of time. Which interval
//! depends on the [`IntervalType`]:
//!
//! * `leading`: the timestamp opens the interval, which runs to the next
//!   timestamp (or one period for the last point).
//! * `trailing_exclusive`: the timestamp closes the interval and is not part
//!   of it; the interval starts at the previous timestamp.
//! * `trailing_inclusive`: like trailing exclusive, shifted forward by one
//!   granule so the timestamp itself falls inside.
//!
//! All intervals are half-open, `[start, end)`.

use std::fmt;
use std::str::FromStr;

use chrono::TimeDelta;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::temporal::CanonicalTimestamp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("timestamps must be strictly increasing (point {index})")]
    NonMonotonicTimestamps { index: usize },
    #[error("a period is required: the series has a single point or irregular spacing")]
    MissingPeriod,
    #[error("granule must be positive")]
    ZeroGranule,
    #[error("period must be positive")]
    NonPositivePeriod,
    #[error("intervals overlap or are out of order (interval {index})")]
    OverlappingIntervals { index: usize },
    #[error("interval start {start} is not before end {end}")]
    EmptyInterval { start: String, end: String },
    #[error("cannot shift {timestamp} by {seconds}s at its precision")]
    PrecisionMismatch { timestamp: String, seconds: i64 },
    #[error("unknown interval type {0:?}")]
    UnknownType(String),
}

/// How a reported timestamp relates to the interval it summarizes. There is
/// no leading-exclusive variant: a leading timestamp is always inside its
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalType {
    Leading,
    TrailingExclusive,
    TrailingInclusive,
}

impl IntervalType {
    pub const ALL: [IntervalType; 3] = [
        IntervalType::Leading,
        IntervalType::TrailingExclusive,
        IntervalType::TrailingInclusive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntervalType::Leading => "leading",
            IntervalType::TrailingExclusive => "trailing_exclusive",
            IntervalType::TrailingInclusive => "trailing_inclusive",
        }
    }
}

impl fmt::Display for IntervalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IntervalType {
    type Err = IntervalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| IntervalError::UnknownType(s.to_string()))
    }
}

/// Half-open `[start, end)` with `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    start: CanonicalTimestamp,
    end: CanonicalTimestamp,
}

impl Interval {
    pub fn new(start: CanonicalTimestamp, end: CanonicalTimestamp) -> Result<Self, IntervalError> {
        if start.instant_key() >= end.instant_key() {
            return Err(IntervalError::EmptyInterval {
                start: start.to_string(),
                end: end.to_string(),
            });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> CanonicalTimestamp {
        self.start
    }

    pub fn end(&self) -> CanonicalTimestamp {
        self.end
    }

    pub fn duration(&self) -> TimeDelta {
        self.end.instant_key() - self.start.instant_key()
    }

    pub fn contains(&self, ts: &CanonicalTimestamp) -> bool {
        let k = ts.instant_key();
        self.start.instant_key() <= k && k < self.end.instant_key()
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start.instant_key() < other.end.instant_key()
            && other.start.instant_key() < self.end.instant_key()
    }

    fn shifted(&self, delta: TimeDelta) -> Result<Self, IntervalError> {
        Ok(Self {
            start: shift(&self.start, delta)?,
            end: shift(&self.end, delta)?,
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimestampedPoint<V = u64> {
    pub timestamp: CanonicalTimestamp,
    pub value: V,
}

impl<V> TimestampedPoint<V> {
    pub fn new(timestamp: CanonicalTimestamp, value: V) -> Self {
        Self { timestamp, value }
    }
}

fn shift(ts: &CanonicalTimestamp, delta: TimeDelta) -> Result<CanonicalTimestamp, IntervalError> {
    ts.checked_add(delta)
        .ok_or_else(|| IntervalError::PrecisionMismatch {
            timestamp: ts.to_string(),
            seconds: delta.num_seconds(),
        })
}

/// Explicit period if given, otherwise the common gap of a regular series.
fn resolve_period<V>(
    points: &[TimestampedPoint<V>],
    period: Option<TimeDelta>,
) -> Result<TimeDelta, IntervalError> {
    if let Some(p) = period {
        return if p > TimeDelta::zero() {
            Ok(p)
        } else {
            Err(IntervalError::NonPositivePeriod)
        };
    }
    let mut gaps = points
        .windows(2)
        .map(|w| w[1].timestamp.instant_key() - w[0].timestamp.instant_key());
    let first = gaps.next().ok_or(IntervalError::MissingPeriod)?;
    if gaps.all(|g| g == first) {
        Ok(first)
    } else {
        Err(IntervalError::MissingPeriod)
    }
}

/// Converts timestamped points to an explicit interval series.
///
/// `period` closes the boundary interval (the last one for leading, the
/// first one for trailing types); when absent it is inferred from a
/// regular series. Values are carried through unchanged.
pub fn to_interval_series<V: Clone>(
    points: &[TimestampedPoint<V>],
    itype: IntervalType,
    period: Option<TimeDelta>,
    granule: TimeDelta,
) -> Result<Vec<(Interval, V)>, IntervalError> {
    if granule <= TimeDelta::zero() {
        return Err(IntervalError::ZeroGranule);
    }
    if let Some(i) = points
        .windows(2)
        .position(|w| w[0].timestamp.instant_key() >= w[1].timestamp.instant_key())
    {
        return Err(IntervalError::NonMonotonicTimestamps { index: i + 1 });
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let period = resolve_period(points, period)?;
    let n = points.len();

    let mut out = Vec::with_capacity(n);
    for (i, p) in points.iter().enumerate() {
        let ts = p.timestamp;
        let interval = match itype {
            IntervalType::Leading => {
                let end = if i + 1 < n {
                    points[i + 1].timestamp
                } else {
                    shift(&ts, period)?
                };
                Interval::new(ts, end)?
            }
            IntervalType::TrailingExclusive | IntervalType::TrailingInclusive => {
                let start = if i == 0 {
                    shift(&ts, -period)?
                } else {
                    points[i - 1].timestamp
                };
                let exclusive = Interval::new(start, ts)?;
                if itype == IntervalType::TrailingInclusive {
                    exclusive.shifted(granule)?
                } else {
                    exclusive
                }
            }
        };
        out.push((interval, p.value.clone()));
    }
    Ok(out)
}

/// Inverse of [`to_interval_series`] for the same type and granule.
pub fn from_interval_series<V: Clone>(
    series: &[(Interval, V)],
    itype: IntervalType,
    granule: TimeDelta,
) -> Result<Vec<TimestampedPoint<V>>, IntervalError> {
    if granule <= TimeDelta::zero() {
        return Err(IntervalError::ZeroGranule);
    }
    if let Some(i) = series
        .windows(2)
        .position(|w| w[0].0.end.instant_key() > w[1].0.start.instant_key())
    {
        return Err(IntervalError::OverlappingIntervals { index: i + 1 });
    }
    series
        .iter()
        .map(|(interval, v)| {
            let ts = match itype {
                IntervalType::Leading => interval.start,
                IntervalType::TrailingExclusive => interval.end,
                IntervalType::TrailingInclusive => shift(&interval.end, -granule)?,
            };
            Ok(TimestampedPoint::new(ts, v.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::parse_date;
    use proptest::prelude::*;

    fn ts(s: &str) -> CanonicalTimestamp {
        parse_date(s, None).unwrap()
    }

    fn iv(a: &str, b: &str) -> Interval {
        Interval::new(ts(a), ts(b)).unwrap()
    }

    fn weekly() -> Vec<TimestampedPoint> {
        vec![
            TimestampedPoint::new(ts("2014-08-07 00:00"), 2),
            TimestampedPoint::new(ts("2014-08-14 00:00"), 5),
            TimestampedPoint::new(ts("2014-08-21 00:00"), 4),
        ]
    }

    const WEEK: TimeDelta = TimeDelta::days(7);
    const DAY: TimeDelta = TimeDelta::days(1);

    #[test]
    fn leading_table() {
        let got = to_interval_series(&weekly(), IntervalType::Leading, Some(WEEK), DAY).unwrap();
        assert_eq!(
            got,
            vec![
                (iv("2014-08-07 00:00", "2014-08-14 00:00"), 2),
                (iv("2014-08-14 00:00", "2014-08-21 00:00"), 5),
                (iv("2014-08-21 00:00", "2014-08-28 00:00"), 4),
            ]
        );
    }

    #[test]
    fn period_inferred_for_regular_series() {
        let a = to_interval_series(&weekly(), IntervalType::TrailingExclusive, None, DAY).unwrap();
        let b = to_interval_series(&weekly(), IntervalType::TrailingExclusive, Some(WEEK), DAY)
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].0, iv("2014-07-31 00:00", "2014-08-07 00:00"));
    }

    #[test]
    fn irregular_series_needs_period() {
        let mut pts = weekly();
        pts[2].timestamp = ts("2014-08-22 00:00");
        assert_eq!(
            to_interval_series(&pts, IntervalType::Leading, None, DAY),
            Err(IntervalError::MissingPeriod)
        );
    }

    #[test]
    fn singleton() {
        let pts = [TimestampedPoint::new(ts("2020-01-01"), 3u64)];
        let got = to_interval_series(&pts, IntervalType::Leading, Some(DAY), DAY).unwrap();
        assert_eq!(got, vec![(iv("2020-01-01", "2020-01-02"), 3)]);
        assert_eq!(
            to_interval_series(&pts, IntervalType::Leading, None, DAY),
            Err(IntervalError::MissingPeriod)
        );
    }

    #[test]
    fn errors() {
        let mut pts = weekly();
        pts.swap(0, 1);
        assert_eq!(
            to_interval_series(&pts, IntervalType::Leading, Some(WEEK), DAY),
            Err(IntervalError::NonMonotonicTimestamps { index: 1 })
        );
        assert_eq!(
            to_interval_series(
                &weekly(),
                IntervalType::Leading,
                Some(WEEK),
                TimeDelta::zero()
            ),
            Err(IntervalError::ZeroGranule)
        );
        let day_pts = [TimestampedPoint::new(ts("2020-01-01"), 1u64)];
        assert!(matches!(
            to_interval_series(
                &day_pts,
                IntervalType::Leading,
                Some(TimeDelta::hours(6)),
                DAY
            ),
            Err(IntervalError::PrecisionMismatch { .. })
        ));
        let overlapping = vec![
            (iv("2020-01-01", "2020-01-08"), 1u64),
            (iv("2020-01-05", "2020-01-12"), 2),
        ];
        assert_eq!(
            from_interval_series(&overlapping, IntervalType::Leading, DAY),
            Err(IntervalError::OverlappingIntervals { index: 1 })
        );
        assert!(Interval::new(ts("2020-01-02"), ts("2020-01-01")).is_err());
        assert!(Interval::new(ts("2020-01-01"), ts("2020-01-01")).is_err());
    }

    #[test]
    fn inverse_of_tables() {
        let leading =
            to_interval_series(&weekly(), IntervalType::Leading, Some(WEEK), DAY).unwrap();
        assert_eq!(
            from_interval_series(&leading, IntervalType::Leading, DAY).unwrap(),
            weekly()
        );
        let incl = to_interval_series(&weekly(), IntervalType::TrailingInclusive, Some(WEEK), DAY)
            .unwrap();
        assert_eq!(
            from_interval_series(&incl, IntervalType::TrailingInclusive, DAY).unwrap(),
            weekly()
        );
        let empty: Vec<(Interval, u64)> = Vec::new();
        assert!(from_interval_series(&empty, IntervalType::Leading, DAY)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn type_names() {
        for t in IntervalType::ALL {
            assert_eq!(t.as_str().parse::<IntervalType>().unwrap(), t);
        }
        assert!("leading_exclusive".parse::<IntervalType>().is_err());
    }

    fn regular_series() -> impl Strategy<Value = (Vec<TimestampedPoint>, i64)> {
        (0i64..20_000, 1i64..=30, 1usize..15).prop_map(|(offset, p, n)| {
            let base =
                chrono::NaiveDate::from_ymd_opt(1990, 1, 1).unwrap() + TimeDelta::days(offset);
            let pts = (0..n)
                .map(|i| {
                    TimestampedPoint::new(
                        CanonicalTimestamp::from_date(base + TimeDelta::days(p * i as i64)),
                        i as u64,
                    )
                })
                .collect();
            (pts, p)
        })
    }

    proptest! {
        #[test]
        fn shift_law((pts, p) in regular_series()) {
            let period = TimeDelta::days(p);
            let excl = to_interval_series(&pts, IntervalType::TrailingExclusive, Some(period), DAY).unwrap();
            let incl = to_interval_series(&pts, IntervalType::TrailingInclusive, Some(period), DAY).unwrap();
            for ((a, _), (b, _)) in excl.iter().zip(&incl) {
                prop_assert_eq!(a.start().checked_add(DAY).unwrap(), b.start());
                prop_assert_eq!(a.end().checked_add(DAY).unwrap(), b.end());
            }
        }

        #[test]
        fn regular_series_tile((pts, p) in regular_series()) {
            for t in IntervalType::ALL {
                let out = to_interval_series(&pts, t, Some(TimeDelta::days(p)), DAY).unwrap();
                for (iv, _) in &out {
                    prop_assert_eq!(iv.duration(), TimeDelta::days(p));
                }
                for w in out.windows(2) {
                    prop_assert_eq!(w[0].0.end(), w[1].0.start());
                }
            }
        }
    }
}
