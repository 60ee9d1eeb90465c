use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Script {
    Devanagari,
    Bengali,
    Tamil,
    Telugu,
    Kannada,
    Malayalam,
    Gujarati,
    Gurmukhi,
    Odia,
    MeeteiMayek,
    OlChiki,
    PersoArabic,
    Latin,
}

impl Script {
    pub const ALL: [Script; 13] = [
        Script::Devanagari,
        Script::Bengali,
        Script::Tamil,
        Script::Telugu,
        Script::Kannada,
        Script::Malayalam,
        Script::Gujarati,
        Script::Gurmukhi,
        Script::Odia,
        Script::MeeteiMayek,
        Script::OlChiki,
        Script::PersoArabic,
        Script::Latin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Script::Devanagari => "Devanagari",
            Script::Bengali => "Bengali",
            Script::Tamil => "Tamil",
            Script::Telugu => "Telugu",
            Script::Kannada => "Kannada",
            Script::Malayalam => "Malayalam",
            Script::Gujarati => "Gujarati",
            Script::Gurmukhi => "Gurmukhi",
            Script::Odia => "Odia",
            Script::MeeteiMayek => "Meitei-Mayek",
            Script::OlChiki => "Ol-Chiki",
            Script::PersoArabic => "Perso-Arabic",
            Script::Latin => "Latin",
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Script {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Script::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s) || format!("{sc:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown script `{s}`")))
    }
}

/// Code-point ranges and sentence terminators of one script.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptProfile {
    pub script: Script,
    pub char_ranges: Vec<RangeInclusive<u32>>,
    pub sentence_delimiters: Vec<char>,
}

impl ScriptProfile {
    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        self.char_ranges.iter().any(|r| r.contains(&cp))
    }
}

const DANDA: char = '\u{0964}';
const DOUBLE_DANDA: char = '\u{0965}';
const URDU_FULL_STOP: char = '\u{06D4}';
const OL_CHIKI_MUCAAD: char = '\u{1C7E}';
const OL_CHIKI_DOUBLE_MUCAAD: char = '\u{1C7F}';
const MEETEI_CHEIKHEI: char = '\u{ABEB}';
const LATIN_TERMINATORS: [char; 3] = ['.', '!', '?'];

/// Profiles for the thirteen scripts of the default label schema.
pub fn default_profiles() -> Vec<ScriptProfile> {
    let indic = |script, ranges: Vec<RangeInclusive<u32>>| ScriptProfile {
        script,
        char_ranges: ranges,
        sentence_delimiters: [DANDA, DOUBLE_DANDA].into_iter().chain(LATIN_TERMINATORS).collect(),
    };
    vec![
        indic(Script::Devanagari, vec![0x0900..=0x097F, 0x1CD0..=0x1CFF, 0xA8E0..=0xA8FF]),
        indic(Script::Bengali, vec![0x0980..=0x09FF]),
        indic(Script::Gurmukhi, vec![0x0A00..=0x0A7F]),
        indic(Script::Gujarati, vec![0x0A80..=0x0AFF]),
        indic(Script::Odia, vec![0x0B00..=0x0B7F]),
        indic(Script::Tamil, vec![0x0B80..=0x0BFF]),
        indic(Script::Telugu, vec![0x0C00..=0x0C7F]),
        indic(Script::Kannada, vec![0x0C80..=0x0CFF]),
        indic(Script::Malayalam, vec![0x0D00..=0x0D7F]),
        ScriptProfile {
            script: Script::MeeteiMayek,
            char_ranges: vec![0xAAE0..=0xAAFF, 0xABC0..=0xABFF],
            sentence_delimiters: vec![MEETEI_CHEIKHEI, DANDA, DOUBLE_DANDA, '.', '!', '?'],
        },
        ScriptProfile {
            script: Script::OlChiki,
            char_ranges: vec![0x1C50..=0x1C7F],
            sentence_delimiters: vec![OL_CHIKI_MUCAAD, OL_CHIKI_DOUBLE_MUCAAD, '.', '!', '?'],
        },
        ScriptProfile {
            script: Script::PersoArabic,
            char_ranges: vec![0x0600..=0x06FF, 0x0750..=0x077F, 0x08A0..=0x08FF, 0xFB50..=0xFDFF, 0xFE70..=0xFEFF],
            sentence_delimiters: vec![URDU_FULL_STOP, '.', '!', '?'],
        },
        ScriptProfile {
            script: Script::Latin,
            char_ranges: vec![0x0041..=0x005A, 0x0061..=0x007A, 0x00C0..=0x024F, 0x1E00..=0x1EFF],
            sentence_delimiters: LATIN_TERMINATORS.to_vec(),
        },
    ]
}

pub fn profile_for(script: Script) -> ScriptProfile {
    default_profiles().into_iter().find(|p| p.script == script).expect("every script has a default profile")
}

/// Key under which letters outside every profile are counted.
pub const OTHER: &str = "other";

/// Per-script share of the letters in a text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScriptMix {
    pub letters: usize,
    pub fractions: BTreeMap<String, f64>,
}

impl ScriptMix {
    pub fn is_empty(&self) -> bool {
        self.letters == 0
    }

    pub fn fraction(&self, script: Script) -> f64 {
        self.fractions.get(script.name()).copied().unwrap_or(0.0)
    }

    pub fn other(&self) -> f64 {
        self.fractions.get(OTHER).copied().unwrap_or(0.0)
    }
}

/// Letters are code points in the letter and mark categories, so Indic
/// vowel signs and visarga count toward their script.
pub fn detect_script(text: &str, profiles: &[ScriptProfile]) -> ScriptMix {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut letters = 0usize;
    for c in text.chars() {
        let group = c.general_category_group();
        if group != GeneralCategoryGroup::Letter && group != GeneralCategoryGroup::Mark {
            continue;
        }
        letters += 1;
        let key = profiles.iter().find(|p| p.contains(c)).map_or(OTHER, |p| p.script.name());
        *counts.entry(key.to_string()).or_default() += 1;
    }
    let fractions = counts.into_iter().map(|(k, n)| (k, n as f64 / letters as f64)).collect();
    ScriptMix { letters, fractions }
}
