//! Monosaccharide name grammar.
//!
//! Accepts the spellings seen in both shift-table sources: `b-D-Glcp`,
//! `aLFucp`, `xDGlca`, `B-D-GLCPN`, `a-D-Neup5Ac`, `bDGlcpNAc`, `a-L-6dTalp`.
//!
//! Grammar, with every part optional except the stem:
//!
//! ```text
//! [anomer a|b|x] [configuration D|L] [<n>d] stem [ring p|f] [suffixes: NAc A N 5Ac Gc Me S Ser ...]
//! ```
//!
//! Parts that are missing or do not parse fall into the `N/A` bucket of
//! their feature.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! category {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:expr),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $label),+ }
            }

            pub fn parse(s: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|v| v.as_str() == s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

category!(
    /// Fischer configuration.
    Configuration { D => "D", L => "L", NA => "N/A" }
);
category!(
    /// Anomeric orientation.
    Anomer { Alpha => "a", Beta => "b", NA => "N/A" }
);
category!(
    /// Pyranose or furanose.
    RingSize { Pyranose => "p", Furanose => "f", NA => "N/A" }
);
category!(
    Stem {
        Gal => "Gal",
        Glc => "Glc",
        Man => "Man",
        Fuc => "Fuc",
        Xyl => "Xyl",
        Rha => "Rha",
        GlcNAc => "GlcNAc",
        GlcA => "GlcA",
        GalA => "GalA",
        Kdo => "Kdo",
        Neu => "Neu",
        Ara => "Ara",
        ManA => "ManA",
        GalN => "GalN",
        Other => "Other",
        NA => "N/A",
    }
);
category!(
    Modification {
        Ac => "Ac",
        Me => "Me",
        S => "S",
        Gc => "Gc",
        Ser => "Ser",
        Deoxy => "Deoxy",
    }
);

/// Parsed monosaccharide name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoName {
    pub anomer: Anomer,
    pub configuration: Configuration,
    /// Canonical three-letter base (`Glc`, `Neu`, `Tal`), before suffixes.
    pub base: Option<String>,
    pub stem: Stem,
    pub ring: RingSize,
    pub modifications: BTreeSet<Modification>,
}

impl MonoName {
    pub fn unknown() -> Self {
        Self {
            anomer: Anomer::NA,
            configuration: Configuration::NA,
            base: None,
            stem: Stem::NA,
            ring: RingSize::NA,
            modifications: BTreeSet::new(),
        }
    }

    /// Number of carbons in the sugar backbone, when the base is known.
    pub fn backbone_length(&self) -> Option<u8> {
        backbone_length(self.base.as_deref()?)
    }

    /// Ring position of the anomeric carbon (2 for ketoses).
    pub fn anomeric_position(&self) -> u8 {
        match self.base.as_deref() {
            Some("Neu" | "Kdo" | "Kdn" | "Fru" | "Tag" | "Sor" | "Psi") => 2,
            _ => 1,
        }
    }
}

const BASES: &[&str] = &[
    "Glc", "Gal", "Man", "Fuc", "Xyl", "Rha", "Ara", "Neu", "Kdo", "Kdn", "Rib", "Lyx", "All",
    "Alt", "Gul", "Ido", "Tal", "Qui", "Fru", "Tag", "Sor", "Psi", "Api", "Hep", "Bac", "Leg",
];

pub fn backbone_length(base: &str) -> Option<u8> {
    Some(match base {
        "Glc" | "Gal" | "Man" | "Fuc" | "Rha" | "All" | "Alt" | "Gul" | "Ido" | "Tal" | "Qui"
        | "Fru" | "Tag" | "Sor" | "Psi" | "Bac" => 6,
        "Xyl" | "Ara" | "Rib" | "Lyx" | "Api" => 5,
        "Hep" => 7,
        "Kdo" => 8,
        "Neu" | "Kdn" | "Leg" => 9,
        _ => return None,
    })
}

/// Names of substituent groups that shift files sometimes list as if they
/// were monosaccharides.
pub fn is_substituent_name(name: &str) -> bool {
    const GROUPS: &[&str] = &[
        "PO3", "P", "PHO", "PO4", "SO3", "SO4", "S", "AC", "ACE", "ACX", "ME", "OME", "MEX", "GC",
        "SER", "ALA", "GRO", "ETN", "CHO", "PYR", "LAC", "NAC", "AC2", "SUL",
    ];
    let upper: String = name
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_uppercase();
    GROUPS.contains(&upper.as_str())
}

impl fmt::Display for MonoName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}{}",
            self.anomer, self.configuration, self.stem, self.ring
        )
    }
}

fn take_base(chars: &[char]) -> Option<(&'static str, usize)> {
    // Allow an "<digits>d" deoxy prefix; the caller records it.
    BASES
        .iter()
        .find(|b| {
            chars.len() >= 3
                && b.chars()
                    .zip(chars)
                    .all(|(x, &y)| x.eq_ignore_ascii_case(&y))
        })
        .map(|b| (*b, 3))
}

/// Parses a monosaccharide name; never fails.
///
/// ```
/// use glycoshift::features::mononame::{parse_mono_name, Anomer, Configuration, RingSize, Stem};
/// let m = parse_mono_name("b-D-Glcp");
/// assert_eq!((m.anomer, m.configuration, m.stem, m.ring),
///            (Anomer::Beta, Configuration::D, Stem::Glc, RingSize::Pyranose));
/// let m = parse_mono_name("aLFucp");
/// assert_eq!((m.anomer, m.configuration, m.stem), (Anomer::Alpha, Configuration::L, Stem::Fuc));
/// ```
pub fn parse_mono_name(raw: &str) -> MonoName {
    let chars: Vec<char> = raw
        .chars()
        .filter(|c| !matches!(c, '-' | ' ' | '_' | '(' | ')' | '[' | ']'))
        .map(|c| match c {
            'α' => 'a',
            'β' => 'b',
            other => other,
        })
        .collect();
    let mixed_case = chars.iter().any(|c| c.is_lowercase()) && chars.iter().any(|c| c.is_uppercase());

    let is_anomer = |c: char| matches!(c.to_ascii_lowercase(), 'a' | 'b' | 'x' | '?');
    let is_config = |c: char| matches!(c, 'D' | 'L' | 'd' | 'l' | '?');

    // Candidate prefix lengths: anomer+configuration, configuration only,
    // anomer only, nothing. The first one followed by a known base wins.
    let mut prefixes: Vec<(Option<char>, Option<char>, usize)> = Vec::new();
    if chars.len() >= 2 && is_anomer(chars[0]) && is_config(chars[1]) {
        prefixes.push((Some(chars[0]), Some(chars[1]), 2));
    }
    if !chars.is_empty() && is_config(chars[0]) {
        prefixes.push((None, Some(chars[0]), 1));
    }
    if !chars.is_empty() && is_anomer(chars[0]) {
        prefixes.push((Some(chars[0]), None, 1));
    }
    prefixes.push((None, None, 0));

    let mut out = MonoName::unknown();
    for (anomer, config, skip) in prefixes {
        let mut i = skip;
        let mut deoxy = false;
        // "6d" / "2,6dd" deoxy prefix.
        let digits = chars[i..]
            .iter()
            .take_while(|c| c.is_ascii_digit() || **c == ',')
            .count();
        if digits > 0 && chars.get(i + digits).is_some_and(|c| *c == 'd') {
            i += digits;
            while chars.get(i) == Some(&'d') {
                i += 1;
            }
            deoxy = true;
        }
        let Some((base, len)) = take_base(&chars[i..]) else {
            continue;
        };
        i += len;

        out.anomer = match anomer.map(|c| c.to_ascii_lowercase()) {
            Some('a') => Anomer::Alpha,
            Some('b') => Anomer::Beta,
            _ => Anomer::NA,
        };
        out.configuration = match config.map(|c| c.to_ascii_uppercase()) {
            Some('D') => Configuration::D,
            Some('L') => Configuration::L,
            _ => Configuration::NA,
        };
        out.base = Some(base.to_string());
        if deoxy {
            out.modifications.insert(Modification::Deoxy);
        }
        let suffix = parse_suffixes(&chars[i..], mixed_case, &mut out);
        out.stem = stem_for(base, &suffix);
        return out;
    }
    out
}

#[derive(Default)]
struct Suffix {
    uronic: bool,
    amino: bool,
    n_acetyl: bool,
}

fn parse_suffixes(chars: &[char], mixed_case: bool, out: &mut MonoName) -> Suffix {
    let mut s = Suffix::default();
    let mut i = 0;
    let upper: Vec<char> = chars.iter().map(|c| c.to_ascii_uppercase()).collect();
    let starts = |i: usize, tok: &str| -> bool {
        let src = if mixed_case { chars } else { &upper[..] };
        tok.chars().enumerate().all(|(k, t)| src.get(i + k) == Some(&t))
    };
    while i < chars.len() {
        let c = chars[i];
        if out.ring == RingSize::NA && (c == 'p' || (!mixed_case && c == 'P' && i == 0)) {
            out.ring = RingSize::Pyranose;
            i += 1;
        } else if out.ring == RingSize::NA && (c == 'f' || (!mixed_case && c == 'F' && i == 0)) {
            out.ring = RingSize::Furanose;
            i += 1;
        } else if starts(i, "NAC") || starts(i, "NAc") {
            s.n_acetyl = true;
            s.amino = true;
            out.modifications.insert(Modification::Ac);
            i += 3;
        } else if starts(i, "NGC") || starts(i, "NGc") {
            s.amino = true;
            out.modifications.insert(Modification::Gc);
            i += 3;
        } else if starts(i, "SER") || starts(i, "Ser") {
            out.modifications.insert(Modification::Ser);
            i += 3;
        } else if starts(i, "AC") || starts(i, "Ac") {
            out.modifications.insert(Modification::Ac);
            i += 2;
        } else if starts(i, "GC") || starts(i, "Gc") {
            out.modifications.insert(Modification::Gc);
            i += 2;
        } else if starts(i, "OME") || starts(i, "OMe") {
            out.modifications.insert(Modification::Me);
            i += 3;
        } else if starts(i, "ME") || starts(i, "Me") {
            out.modifications.insert(Modification::Me);
            i += 2;
        } else if starts(i, "SO3") || starts(i, "S") {
            out.modifications.insert(Modification::S);
            i += if starts(i, "SO3") { 3 } else { 1 };
        } else if c == 'A' {
            s.uronic = true;
            i += 1;
        } else if c == 'N' {
            s.amino = true;
            i += 1;
        } else {
            // digits, commas, 'a' (acyclic), 'ol', unknown letters
            i += 1;
        }
    }
    s
}

fn stem_for(base: &str, s: &Suffix) -> Stem {
    match (base, s.uronic, s.amino, s.n_acetyl) {
        ("Neu", ..) => Stem::Neu,
        ("Kdo", ..) => Stem::Kdo,
        ("Glc", false, true, true) => Stem::GlcNAc,
        ("Glc", true, false, _) => Stem::GlcA,
        ("Glc", false, false, _) => Stem::Glc,
        ("Gal", true, false, _) => Stem::GalA,
        ("Gal", false, true, false) => Stem::GalN,
        ("Gal", false, false, _) => Stem::Gal,
        ("Man", true, false, _) => Stem::ManA,
        ("Man", false, false, _) => Stem::Man,
        ("Fuc", false, false, _) => Stem::Fuc,
        ("Xyl", false, false, _) => Stem::Xyl,
        ("Rha", false, false, _) => Stem::Rha,
        ("Ara", false, false, _) => Stem::Ara,
        _ => Stem::Other,
    }
}

/// Stem implied by a PDB three-letter residue code, when it is a common one.
pub fn stem_from_residue_code(code: &str) -> Option<Stem> {
    let upper = code.trim().to_ascii_uppercase();
    let stem = match upper.as_str() {
        "GLC" | "BGC" | "GLB" => Stem::Glc,
        "GAL" | "GLA" | "GAB" => Stem::Gal,
        "MAN" | "BMA" => Stem::Man,
        "FUC" | "FUL" => Stem::Fuc,
        "XYS" | "XYP" | "XYL" => Stem::Xyl,
        "RAM" | "RHA" | "RM4" => Stem::Rha,
        "NAG" | "NDG" => Stem::GlcNAc,
        "GCU" | "BDP" => Stem::GlcA,
        "ADA" | "GTR" => Stem::GalA,
        "KDO" => Stem::Kdo,
        "SIA" | "SLB" | "NGC" | "NEU" => Stem::Neu,
        "ARA" | "ARB" | "AHR" | "FUB" => Stem::Ara,
        "MAV" | "BEM" => Stem::ManA,
        "GCS" | "PA1" | "X6X" => Stem::GalN,
        _ => {
            // Mixed-case residue names such as "Glc" or "GlcNAc".
            let m = parse_mono_name(code);
            return (m.stem != Stem::NA && m.stem != Stem::Other).then_some(m.stem);
        }
    };
    Some(stem)
}
