//! Byte-stream decoding to canonical text.
//!
//! Only ASCII, ISO-8859-1 and UTF-8 are understood. A declared encoding is
//! applied strictly; without a declaration the bytes are tried as UTF-8 and
//! fall back to ISO-8859-1, which accepts every byte sequence. Line endings
//! are always normalized to `\n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const UTF8_BOM: &[u8] = b"\xEF\xBB\xBF";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Encoding {
    #[serde(rename = "ASCII")]
    Ascii,
    #[serde(rename = "ISO-8859-1")]
    Iso8859_1,
    #[serde(rename = "UTF-8")]
    Utf8,
}

impl Encoding {
    pub fn name(self) -> &'static str {
        match self {
            Encoding::Ascii => "ASCII",
            Encoding::Iso8859_1 => "ISO-8859-1",
            Encoding::Utf8 => "UTF-8",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Encoding {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "ascii" | "usascii" => Ok(Encoding::Ascii),
            "iso88591" | "latin1" | "l1" => Ok(Encoding::Iso8859_1),
            "utf8" => Ok(Encoding::Utf8),
            _ => Err(EncodingError::Unsupported(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NewlineStyle {
    Crlf,
    Lf,
    /// Bare carriage returns only.
    Cr,
    Mixed,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedText {
    pub text: String,
    pub source_encoding: Encoding,
    pub had_bom: bool,
    pub newline_style: NewlineStyle,
}

impl DecodedText {
    /// Set when the source mixed line-ending conventions. Not an error.
    pub fn has_mixed_newlines(&self) -> bool {
        self.newline_style == NewlineStyle::Mixed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error(
        "declared encoding {declared} cannot decode input (first bad byte at offset {offset})"
    )]
    DeclaredEncodingMismatch { declared: Encoding, offset: usize },
    #[error("unsupported encoding {0:?}; expected one of ASCII, ISO-8859-1, UTF-8")]
    Unsupported(String),
}

/// Decodes `bytes` under `declared`, or detects the encoding when no
/// declaration is given.
pub fn detect_and_decode(
    bytes: &[u8],
    declared: Option<Encoding>,
) -> Result<DecodedText, EncodingError> {
    let (raw, encoding, had_bom) = match declared {
        Some(Encoding::Utf8) => {
            let (body, bom) = strip_bom(bytes);
            let s =
                std::str::from_utf8(body).map_err(|e| EncodingError::DeclaredEncodingMismatch {
                    declared: Encoding::Utf8,
                    offset: e.valid_up_to() + if bom { UTF8_BOM.len() } else { 0 },
                })?;
            (s.to_string(), Encoding::Utf8, bom)
        }
        Some(Encoding::Ascii) => {
            if let Some(offset) = bytes.iter().position(|b| !b.is_ascii()) {
                return Err(EncodingError::DeclaredEncodingMismatch {
                    declared: Encoding::Ascii,
                    offset,
                });
            }
            (latin1_to_string(bytes), Encoding::Ascii, false)
        }
        Some(Encoding::Iso8859_1) => (latin1_to_string(bytes), Encoding::Iso8859_1, false),
        None => {
            let (body, bom) = strip_bom(bytes);
            match std::str::from_utf8(body) {
                // 7-bit input is valid UTF-8, so it is reported as UTF-8 here.
                Ok(s) => (s.to_string(), Encoding::Utf8, bom),
                Err(_) => (latin1_to_string(bytes), Encoding::Iso8859_1, false),
            }
        }
    };
    let (text, newline_style) = normalize_newlines(&raw);
    Ok(DecodedText {
        text,
        source_encoding: encoding,
        had_bom,
        newline_style,
    })
}

fn strip_bom(bytes: &[u8]) -> (&[u8], bool) {
    match bytes.strip_prefix(UTF8_BOM) {
        Some(rest) => (rest, true),
        None => (bytes, false),
    }
}

// ISO-8859-1 maps each byte to the code point of the same value.
fn latin1_to_string(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| char::from(b)).collect()
}

/// Rewrites CRLF and bare CR to LF and reports what was found.
pub fn normalize_newlines(s: &str) -> (String, NewlineStyle) {
    let (mut crlf, mut cr, mut lf) = (0usize, 0usize, 0usize);
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\r' => {
                if chars.peek() == Some(&'\n') {
                    chars.next();
                    crlf += 1;
                } else {
                    cr += 1;
                }
                out.push('\n');
            }
            '\n' => {
                lf += 1;
                out.push('\n');
            }
            c => out.push(c),
        }
    }
    let style = match (crlf > 0, lf > 0, cr > 0) {
        (false, false, false) => NewlineStyle::None,
        (true, false, false) => NewlineStyle::Crlf,
        (false, true, false) => NewlineStyle::Lf,
        (false, false, true) => NewlineStyle::Cr,
        _ => NewlineStyle::Mixed,
    };
    (out, style)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_declared_as_utf8() {
        let d = detect_and_decode(b"date,cases\n", Some(Encoding::Utf8)).unwrap();
        assert_eq!(d.text, "date,cases\n");
        assert_eq!(d.source_encoding, Encoding::Utf8);
        assert_eq!(d.newline_style, NewlineStyle::Lf);
    }

    #[test]
    fn empty_input() {
        let d = detect_and_decode(b"", None).unwrap();
        assert_eq!(d.text, "");
        assert_eq!(d.source_encoding, Encoding::Utf8);
        assert_eq!(d.newline_style, NewlineStyle::None);
        assert!(!d.had_bom);
    }

    #[test]
    fn lone_latin1_byte() {
        let d = detect_and_decode(&[0xFC], None).unwrap();
        assert_eq!(d.text, "ü");
        assert_eq!(d.source_encoding, Encoding::Iso8859_1);
    }

    #[test]
    fn bad_continuation_under_utf8() {
        let err = detect_and_decode(&[0xC3, 0x28], Some(Encoding::Utf8)).unwrap_err();
        assert_eq!(
            err,
            EncodingError::DeclaredEncodingMismatch {
                declared: Encoding::Utf8,
                offset: 0
            }
        );
    }

    #[test]
    fn high_byte_under_ascii() {
        let err = detect_and_decode(b"ab\xFC", Some(Encoding::Ascii)).unwrap_err();
        assert!(matches!(
            err,
            EncodingError::DeclaredEncodingMismatch { offset: 2, .. }
        ));
    }

    #[test]
    fn bom_is_stripped_and_recorded() {
        let d = detect_and_decode(b"\xEF\xBB\xBFa,b\r\n", None).unwrap();
        assert!(d.had_bom);
        assert_eq!(d.text, "a,b\n");
        assert_eq!(d.newline_style, NewlineStyle::Crlf);
    }

    #[test]
    fn mixed_newlines_flagged() {
        let d = detect_and_decode(b"a\r\nb\nc\rd", None).unwrap();
        assert_eq!(d.text, "a\nb\nc\nd");
        assert!(d.has_mixed_newlines());
    }

    #[test]
    fn encoding_names() {
        assert_eq!("utf8".parse::<Encoding>().unwrap(), Encoding::Utf8);
        assert_eq!("Latin-1".parse::<Encoding>().unwrap(), Encoding::Iso8859_1);
        assert_eq!("US-ASCII".parse::<Encoding>().unwrap(), Encoding::Ascii);
        assert!("windows-1252".parse::<Encoding>().is_err());
    }

    proptest! {
        #[test]
        fn utf8_round_trip(s in ".*") {
            // A leading U+FEFF is read as a byte-order mark.
            prop_assume!(!s.starts_with('\u{feff}'));
            let d = detect_and_decode(s.as_bytes(), Some(Encoding::Utf8)).unwrap();
            let (expected, _) = normalize_newlines(&s);
            prop_assert_eq!(d.text, expected);
        }

        #[test]
        fn utf8_round_trip_without_cr(s in "[^\r\u{feff}][^\r]*") {
            let d = detect_and_decode(s.as_bytes(), Some(Encoding::Utf8)).unwrap();
            prop_assert_eq!(d.text, s);
        }

        #[test]
        fn ascii_embeds_in_both(bytes in proptest::collection::vec(0u8..128, 0..200)) {
            let a = detect_and_decode(&bytes, Some(Encoding::Utf8)).unwrap();
            let b = detect_and_decode(&bytes, Some(Encoding::Iso8859_1)).unwrap();
            prop_assert_eq!(a.text, b.text);
        }

        #[test]
        fn newline_normalization_idempotent(s in "[a\r\n]{0,40}") {
            let (once, _) = normalize_newlines(&s);
            let (twice, _) = normalize_newlines(&once);
            prop_assert!(!once.contains('\r'));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn detected_ascii_is_seven_bit(bytes in proptest::collection::vec(any::<u8>(), 0..100)) {
            let d = detect_and_decode(&bytes, None).unwrap();
            if d.source_encoding == Encoding::Ascii {
                prop_assert!(d.text.chars().all(|c| (c as u32) < 128));
            }
            prop_assert!(!d.text.contains('\r'));
        }
    }
}
