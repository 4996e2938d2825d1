//! Atom and shift-label normalization shared by the parsers, the matcher and
//! the feature builder.
//!
//! Both sides of a match (PDB atom names and shift-table position labels) are
//! reduced to the same canonical spelling: nucleus letter followed by the ring
//! position digit and an optional suffix, e.g. `C1`, `H5`, `H61`.

use serde::{Deserialize, Serialize};
use std::fmt;

/// NMR-active nucleus of a shift label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Nucleus {
    C13,
    H1,
    Other,
}

impl Nucleus {
    pub fn from_element(element: &str) -> Self {
        match element {
            "C" => Nucleus::C13,
            "H" => Nucleus::H1,
            _ => Nucleus::Other,
        }
    }

    /// Parse-time plausibility window in ppm.
    pub fn sanity_window(self) -> Option<(f64, f64)> {
        match self {
            Nucleus::C13 => Some((0.0, 250.0)),
            Nucleus::H1 => Some((-2.0, 15.0)),
            Nucleus::Other => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Nucleus::C13 => "c13",
            Nucleus::H1 => "h1",
            Nucleus::Other => "other",
        }
    }
}

impl fmt::Display for Nucleus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Canonical spelling of an atom name or shift-position label.
///
/// Rules, applied in order:
/// - whitespace, quotes, `-` and `_` are removed and letters upper-cased;
/// - digit-first spellings are reordered (`1H` → `H1`, `13C2` is not special);
/// - a hydrogen with a lettered geminal suffix is numbered (`H6A` → `H61`,
///   `H6B` → `H62`, `H6C` → `H63`).
///
/// ```
/// use glycoshift::labels::normalize_label;
/// assert_eq!(normalize_label("H-1"), "H1");
/// assert_eq!(normalize_label("1h"), "H1");
/// assert_eq!(normalize_label("h6a"), "H61");
/// assert_eq!(normalize_label(" C5 "), "C5");
/// ```
pub fn normalize_label(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .filter(|c| !c.is_whitespace() && !matches!(c, '"' | '\'' | '-' | '_'))
        .flat_map(char::to_uppercase)
        .collect();

    // "1H" / "5C" -> "H1" / "C5"
    let digits: String = cleaned.chars().take_while(char::is_ascii_digit).collect();
    let rest = &cleaned[digits.len()..];
    let cleaned = if !digits.is_empty()
        && rest.len() == 1
        && rest.chars().all(|c| c.is_ascii_alphabetic())
    {
        format!("{rest}{digits}")
    } else {
        cleaned
    };

    let mut chars = cleaned.chars();
    if chars.next() == Some('H') {
        let tail: Vec<char> = chars.collect();
        if tail.len() == 2 && tail[0].is_ascii_digit() {
            let numbered = match tail[1] {
                'A' => Some('1'),
                'B' => Some('2'),
                'C' => Some('3'),
                _ => None,
            };
            if let Some(n) = numbered {
                return format!("H{}{}", tail[0], n);
            }
        }
    }
    cleaned
}

/// Position digit carried by a canonical label: `C4` → 4, `H61` → 6, `O5` → 5.
///
/// Returns `None` for names whose element letter is not directly followed by
/// a position (`HO2`, `CH3`) and for two-digit heavy-atom positions (`C10`).
pub fn position_digit(label: &str) -> Option<u8> {
    let mut chars = label.chars();
    let element = chars.next()?;
    if !element.is_ascii_alphabetic() {
        return None;
    }
    let tail: Vec<char> = chars.collect();
    let digits: Vec<char> = tail.iter().copied().take_while(char::is_ascii_digit).collect();
    let suffix_len = tail.len() - digits.len();
    match (element, digits.len()) {
        (_, 1) if suffix_len <= 1 => digits[0].to_digit(10).map(|d| d as u8),
        ('H', 2) if suffix_len == 0 => digits[0].to_digit(10).map(|d| d as u8),
        _ => None,
    }
    .filter(|&d| d >= 1)
}

/// True for main-ring carbon/hydrogen labels (`C1`..`C9`, `H1`..`H9`,
/// `H61`..`H93`).
pub fn is_ring_label(label: &str) -> bool {
    let b = label.as_bytes();
    match b {
        [b'C', d] => (b'1'..=b'9').contains(d),
        [b'H', d] => (b'1'..=b'9').contains(d),
        [b'H', d, e] => (b'1'..=b'9').contains(d) && (b'1'..=b'3').contains(e),
        _ => false,
    }
}

/// Nucleus implied by the first letter of a canonical label.
pub fn label_nucleus(label: &str) -> Nucleus {
    match label.as_bytes().first() {
        Some(b'C') => Nucleus::C13,
        Some(b'H') => Nucleus::H1,
        _ => Nucleus::Other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_spellings_collapse() {
        for raw in ["H1", "H-1", "1H", "h1", " H1", "'H1'"] {
            assert_eq!(normalize_label(raw), "H1", "{raw}");
        }
        assert_eq!(normalize_label("C-6"), "C6");
        assert_eq!(normalize_label("H6b"), "H62");
        assert_eq!(normalize_label("H61"), "H61");
        assert_eq!(normalize_label("HO2"), "HO2");
    }

    #[test]
    fn positions() {
        assert_eq!(position_digit("C1"), Some(1));
        assert_eq!(position_digit("O5"), Some(5));
        assert_eq!(position_digit("H61"), Some(6));
        assert_eq!(position_digit("H8A"), Some(8));
        assert_eq!(position_digit("O1A"), Some(1));
        assert_eq!(position_digit("C10"), None);
        assert_eq!(position_digit("HO2"), None);
        assert_eq!(position_digit("CH3"), None);
        assert_eq!(position_digit("P"), None);
    }

    #[test]
    fn ring_labels() {
        assert!(is_ring_label("C1"));
        assert!(is_ring_label("H9"));
        assert!(is_ring_label("H62"));
        assert!(!is_ring_label("C10"));
        assert!(!is_ring_label("O5"));
        assert!(!is_ring_label("CH3"));
        assert!(!is_ring_label("H64"));
    }
}
