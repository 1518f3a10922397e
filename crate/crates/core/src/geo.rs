//! Location names to ISO 3166 codes.
//!
//! Names are folded (lower-cased, diacritics removed, whitespace collapsed)
//! before lookup, so "Zurich", "ZÜRICH" and "Zürich" meet at the same key.
//! Entries carry an optional validity window so a code can have several
//! boundary versions over time.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_GAZETTEER: &str = include_str!("../data/gazetteer.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeoError {
    #[error("location name is empty")]
    EmptyName,
    #[error("unknown location {0:?}")]
    UnknownLocation(String),
    #[error("location {name:?} is ambiguous: {}", candidates.join(", "))]
    AmbiguousLocation {
        name: String,
        candidates: Vec<String>,
    },
    #[error("location {name:?} has no version valid on {date}")]
    NoVersionForDate { name: String, date: NaiveDate },
    #[error("population must be positive")]
    ZeroPopulation,
    #[error("invalid gazetteer: {0}")]
    InvalidGazetteer(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub count: u64,
    pub reference_date: NaiveDate,
}

/// One place, possibly one of several boundary versions of the same code.
/// The validity window is half-open: `[valid_from, valid_to)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationRef {
    pub code: String,
    pub canonical_name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_from: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_to: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<Population>,
    /// Finer than an ISO 3166-2 subdivision; the code is local convention.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub extension: bool,
}

impl LocationRef {
    pub fn new(code: impl Into<String>, canonical_name: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            canonical_name: canonical_name.into(),
            aliases: Vec::new(),
            valid_from: None,
            valid_to: None,
            population: None,
            extension: false,
        }
    }

    pub fn is_valid_on(&self, date: NaiveDate) -> bool {
        self.valid_from.is_none_or(|f| f <= date) && self.valid_to.is_none_or(|t| date < t)
    }

    pub fn is_current(&self) -> bool {
        self.valid_to.is_none()
    }

    fn overlaps(&self, other: &LocationRef) -> bool {
        let starts_before_other_ends = match (self.valid_from, other.valid_to) {
            (Some(f), Some(t)) => f < t,
            _ => true,
        };
        let other_starts_before_end = match (other.valid_from, self.valid_to) {
            (Some(f), Some(t)) => f < t,
            _ => true,
        };
        starts_before_other_ends && other_starts_before_end
    }

    /// Cases per 100,000 of this entry's population.
    pub fn incidence_rate(&self, cases: u64) -> Result<f64, GeoError> {
        let pop = self.population.ok_or(GeoError::ZeroPopulation)?;
        incidence_rate(cases, pop.count)
    }
}

/// `cases × 100000 / population`.
pub fn incidence_rate(cases: u64, population: u64) -> Result<f64, GeoError> {
    if population == 0 {
        return Err(GeoError::ZeroPopulation);
    }
    // Exact numerator when it fits in 53 bits; one IEEE division then
    // rounds correctly.
    let numerator = u128::from(cases) * 100_000;
    Ok(numerator as f64 / population as f64)
}

/// Lower-cases, strips Latin diacritics through a fixed table, drops
/// combining marks and collapses whitespace.
pub fn fold(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars().flat_map(char::to_lowercase) {
        if ('\u{0300}'..='\u{036F}').contains(&c) {
            continue;
        }
        match fold_char(c) {
            Some(s) => out.push_str(s),
            None => out.push(c),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fold_char(c: char) -> Option<&'static str> {
    Some(match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'ā' | 'ă' | 'ą' | 'ǎ' | 'ạ' | 'ả' | 'ấ' | 'ầ' | 'ậ' => {
            "a"
        }
        'æ' => "ae",
        'ç' | 'ć' | 'ĉ' | 'ċ' | 'č' => "c",
        'ď' | 'đ' | 'ð' => "d",
        'è' | 'é' | 'ê' | 'ë' | 'ē' | 'ĕ' | 'ė' | 'ę' | 'ě' | 'ẹ' | 'ẻ' | 'ẽ' | 'ế' | 'ề' | 'ệ' => {
            "e"
        }
        'ĝ' | 'ğ' | 'ġ' | 'ģ' => "g",
        'ĥ' | 'ħ' => "h",
        'ì' | 'í' | 'î' | 'ï' | 'ĩ' | 'ī' | 'ĭ' | 'į' | 'ı' | 'ǐ' | 'ị' | 'ỉ' => "i",
        'ĳ' => "ij",
        'ĵ' => "j",
        'ķ' => "k",
        'ĺ' | 'ļ' | 'ľ' | 'ŀ' | 'ł' => "l",
        'ñ' | 'ń' | 'ņ' | 'ň' | 'ŉ' => "n",
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'ō' | 'ŏ' | 'ő' | 'ơ' | 'ǒ' | 'ọ' | 'ỏ' | 'ố' | 'ồ'
        | 'ộ' | 'ớ' | 'ờ' | 'ợ' => "o",
        'œ' => "oe",
        'ŕ' | 'ŗ' | 'ř' => "r",
        'ś' | 'ŝ' | 'ş' | 'š' | 'ș' => "s",
        'ß' => "ss",
        'ţ' | 'ť' | 'ŧ' | 'ț' => "t",
        'ù' | 'ú' | 'û' | 'ü' | 'ũ' | 'ū' | 'ŭ' | 'ů' | 'ű' | 'ų' | 'ư' | 'ǔ' | 'ụ' | 'ủ' | 'ứ'
        | 'ừ' | 'ự' => "u",
        'ŵ' => "w",
        'ý' | 'ÿ' | 'ŷ' | 'ỳ' | 'ỹ' => "y",
        'ź' | 'ż' | 'ž' => "z",
        'þ' => "th",
        '\u{2018}' | '\u{2019}' | '\u{02BC}' => "'",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum MatchTier {
    Canonical,
    Code,
    Alias,
}

/// Immutable name → location index.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: Vec<LocationRef>,
    fold_index: BTreeMap<String, Vec<(MatchTier, usize)>>,
}

fn is_iso_code(code: &str) -> bool {
    let upper_alpha = |s: &str| s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase());
    match code.split_once('-') {
        None => upper_alpha(code),
        Some((country, sub)) => {
            upper_alpha(country)
                && (1..=3).contains(&sub.len())
                && sub
                    .bytes()
                    .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
        }
    }
}

impl Gazetteer {
    /// Validates and indexes `entries`.
    pub fn new(entries: Vec<LocationRef>) -> Result<Self, GeoError> {
        let invalid = |msg: String| GeoError::InvalidGazetteer(msg);
        let mut fold_index: BTreeMap<String, Vec<(MatchTier, usize)>> = BTreeMap::new();

        for (i, e) in entries.iter().enumerate() {
            if e.code.trim().is_empty() {
                return Err(invalid(format!("entry {i} has an empty code")));
            }
            if !e.extension && !is_iso_code(&e.code) {
                return Err(invalid(format!(
                    "{:?} is not an ISO 3166 code; mark finer places as extension entries",
                    e.code
                )));
            }
            if let (Some(f), Some(t)) = (e.valid_from, e.valid_to) {
                if f >= t {
                    return Err(invalid(format!(
                        "{}: valid_from {f} is not before valid_to {t}",
                        e.code
                    )));
                }
            }
            let canonical = fold(&e.canonical_name);
            if canonical.is_empty() {
                return Err(invalid(format!("{}: empty canonical name", e.code)));
            }
            let mut keys = vec![canonical.clone()];
            for alias in &e.aliases {
                let k = fold(alias);
                if k.is_empty() || keys.contains(&k) {
                    return Err(invalid(format!(
                        "{}: alias {alias:?} does not fold to a distinct key",
                        e.code
                    )));
                }
                keys.push(k);
            }

            fold_index
                .entry(canonical)
                .or_default()
                .push((MatchTier::Canonical, i));
            fold_index
                .entry(fold(&e.code))
                .or_default()
                .push((MatchTier::Code, i));
            for k in keys.into_iter().skip(1) {
                fold_index.entry(k).or_default().push((MatchTier::Alias, i));
            }
        }

        let folded: Vec<String> = entries.iter().map(|e| fold(&e.canonical_name)).collect();
        for (i, a) in entries.iter().enumerate() {
            for (j, b) in entries.iter().enumerate().skip(i + 1) {
                if a.code == b.code && a.overlaps(b) {
                    return Err(invalid(format!("{}: overlapping validity windows", a.code)));
                }
                if a.code != b.code && folded[i] == folded[j] {
                    return Err(invalid(format!(
                        "{} and {} share the canonical name {:?}",
                        a.code, b.code, a.canonical_name
                    )));
                }
            }
        }

        Ok(Self {
            entries,
            fold_index,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, GeoError> {
        let entries: Vec<LocationRef> =
            serde_json::from_str(text).map_err(|e| GeoError::InvalidGazetteer(e.to_string()))?;
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self, GeoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeoError::InvalidGazetteer(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// ISO 3166-1 countries plus the top-level subdivisions of a handful of
    /// countries, with Sudan split into pre- and post-2011 versions.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_GAZETTEER).expect("bundled gazetteer is valid")
    }

    pub fn entries(&self) -> &[LocationRef] {
        &self.entries
    }

    /// Serializes as the same JSON array [`Gazetteer::from_json`] reads.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("entries serialize")
    }

    /// Looks `name` up by canonical name, then code, then alias. With
    /// `as_of`, only versions valid on that date are eligible; without it,
    /// current (open-ended) versions are preferred.
    pub fn resolve(&self, name: &str, as_of: Option<NaiveDate>) -> Result<&LocationRef, GeoError> {
        if name.trim().is_empty() {
            return Err(GeoError::EmptyName);
        }
        let key = fold(name);
        let hits = self
            .fold_index
            .get(&key)
            .ok_or_else(|| GeoError::UnknownLocation(name.to_string()))?;

        for tier in [MatchTier::Canonical, MatchTier::Code, MatchTier::Alias] {
            let in_tier: Vec<&LocationRef> = hits
                .iter()
                .filter(|(t, _)| *t == tier)
                .map(|&(_, i)| &self.entries[i])
                .collect();
            if in_tier.is_empty() {
                continue;
            }
            let eligible: Vec<&LocationRef> = match as_of {
                Some(d) => in_tier.into_iter().filter(|e| e.is_valid_on(d)).collect(),
                None => {
                    let current: Vec<_> =
                        in_tier.iter().copied().filter(|e| e.is_current()).collect();
                    if current.is_empty() {
                        in_tier
                    } else {
                        current
                    }
                }
            };
            match eligible.as_slice() {
                [] => continue,
                [one] => return Ok(one),
                many => {
                    let mut candidates: Vec<String> = many.iter().map(|e| e.code.clone()).collect();
                    candidates.sort();
                    candidates.dedup();
                    return Err(GeoError::AmbiguousLocation {
                        name: name.to_string(),
                        candidates,
                    });
                }
            }
        }
        match as_of {
            Some(date) => Err(GeoError::NoVersionForDate {
                name: name.to_string(),
                date,
            }),
            None => Err(GeoError::UnknownLocation(name.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn zurich_spellings_meet() {
        let g = Gazetteer::builtin();
        let a = g.resolve("Zurich", None).unwrap();
        let b = g.resolve("Zürich", None).unwrap();
        let c = g.resolve("  ZÜRICH ", None).unwrap();
        assert_eq!(a.code, "CH-ZH");
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn sudan_versions() {
        let g = Gazetteer::builtin();
        let before = g.resolve("Sudan", Some(ymd(2010, 6, 1))).unwrap();
        let after = g.resolve("Sudan", Some(ymd(2012, 6, 1))).unwrap();
        assert_eq!(before.code, "SD");
        assert_eq!(after.code, "SD");
        assert_ne!(before, after);
        assert_ne!(before.population, after.population);
        assert!(before.population.unwrap().count > after.population.unwrap().count);
        assert_eq!(g.resolve("Sudan", None).unwrap(), after);
        assert!(matches!(
            g.resolve("South Sudan", Some(ymd(2010, 6, 1))),
            Err(GeoError::NoVersionForDate { .. })
        ));
    }

    #[test]
    fn contract_errors() {
        let g = Gazetteer::builtin();
        assert_eq!(g.resolve("", None), Err(GeoError::EmptyName));
        assert_eq!(
            g.resolve("Atlantis", None),
            Err(GeoError::UnknownLocation("Atlantis".into()))
        );
    }

    #[test]
    fn tiers_and_ambiguity() {
        let g = Gazetteer::builtin();
        // Canonical beats alias: the country, not the US state.
        assert_eq!(g.resolve("Georgia", None).unwrap().code, "GE");
        assert_eq!(g.resolve("Georgia (US)", None).unwrap().code, "US-GA");
        assert_eq!(g.resolve("us-ga", None).unwrap().code, "US-GA");
        assert_eq!(g.resolve("United States", None).unwrap().code, "US");
        assert_eq!(g.resolve("DEU", None).unwrap().code, "DE");

        let mut a = LocationRef::new("XA", "Springfield Alpha");
        a.aliases.push("Springfield".into());
        a.extension = true;
        let mut b = LocationRef::new("XB", "Springfield Beta");
        b.aliases.push("Springfield".into());
        b.extension = true;
        let g = Gazetteer::new(vec![a, b]).unwrap();
        assert_eq!(
            g.resolve("springfield", None),
            Err(GeoError::AmbiguousLocation {
                name: "springfield".into(),
                candidates: vec!["XA".into(), "XB".into()]
            })
        );
    }

    #[test]
    fn load_validation() {
        let mut dup = LocationRef::new("CH-ZH", "Zürich");
        dup.aliases.push("ZURICH".into());
        assert!(Gazetteer::new(vec![dup]).is_err());

        let mut v1 = LocationRef::new("SD", "Sudan");
        v1.valid_to = Some(ymd(2011, 7, 9));
        let mut v2 = LocationRef::new("SD", "Sudan");
        v2.valid_from = Some(ymd(2011, 7, 1));
        assert!(Gazetteer::new(vec![v1.clone(), v2.clone()]).is_err());
        v2.valid_from = Some(ymd(2011, 7, 9));
        assert!(Gazetteer::new(vec![v1, v2]).is_ok());

        let mut backwards = LocationRef::new("SS", "South Sudan");
        backwards.valid_from = Some(ymd(2012, 1, 1));
        backwards.valid_to = Some(ymd(2011, 1, 1));
        assert!(Gazetteer::new(vec![backwards]).is_err());

        assert!(Gazetteer::new(vec![LocationRef::new("Harris County", "Harris County")]).is_err());
        assert!(Gazetteer::new(vec![
            LocationRef::new("XA", "Same"),
            LocationRef::new("XB", "same")
        ])
        .is_err());
        assert!(
            Gazetteer::from_json(r#"[{"code":"US","canonical_name":"x","colour":1}]"#).is_err()
        );
    }

    #[test]
    fn gazetteer_json_round_trip() {
        let g = Gazetteer::builtin();
        let again = Gazetteer::from_json(&g.to_json()).unwrap();
        assert_eq!(g.entries(), again.entries());
    }

    #[test]
    fn every_entry_resolves_to_itself() {
        let g = Gazetteer::builtin();
        for e in g.entries() {
            let as_of = if e.valid_to.is_some() {
                e.valid_from.or(e.valid_to.and_then(|t| t.pred_opt()))
            } else {
                None
            };
            assert_eq!(
                g.resolve(&e.canonical_name, as_of).unwrap(),
                e,
                "{}",
                e.canonical_name
            );
        }
    }

    #[test]
    fn rates() {
        assert_eq!(incidence_rate(5, 100_000).unwrap(), 5.0);
        assert_eq!(incidence_rate(0, 100_000).unwrap(), 0.0);
        assert_eq!(incidence_rate(1, 0), Err(GeoError::ZeroPopulation));
    }

    /// Long-hand decimal division, independent of float arithmetic.
    fn long_division(num: u128, den: u128, digits: usize) -> String {
        let mut s = format!("{}.", num / den);
        let mut rem = num % den;
        for _ in 0..digits {
            rem *= 10;
            s.push(char::from(b'0' + (rem / den) as u8));
            rem %= den;
        }
        s
    }

    #[test]
    fn rate_matches_long_hand() {
        let expected: f64 = long_division(123 * 100_000, 7_654_321, 40).parse().unwrap();
        let got = incidence_rate(123, 7_654_321).unwrap();
        assert_eq!(got, expected);
        // Exact rational 12300000/7654321 rounded to f64.
        assert_eq!(got, 1.606_935_481_279_136_3);
    }

    proptest! {
        #[test]
        fn fold_is_idempotent(s in "\\PC{0,30}") {
            let once = fold(&s);
            prop_assert_eq!(fold(&once), once);
        }

        #[test]
        fn rate_agrees_with_long_division(cases in 0u64..1_000_000_000, pop in 1u64..10_000_000_000) {
            let expected: f64 = long_division(u128::from(cases) * 100_000, u128::from(pop), 40).parse().unwrap();
            prop_assert_eq!(incidence_rate(cases, pop).unwrap(), expected);
        }
    }
}
