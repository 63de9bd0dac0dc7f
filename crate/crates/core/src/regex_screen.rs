//! Rule-based screening: every sampled value is tested against every entry
//! of a Safe Harbor pattern library and the column scores the largest
//! per-pattern match fraction.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::category::{CategorySet, PhiCategory};
use crate::error::{Error, Result};
use crate::ingest::{sample_column, ColumnSample, Dataset};

const BUILTIN_JSON: &str = include_str!("../data/safe_harbor_patterns.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// The whole trimmed token must match.
    Full,
    /// Any match inside the token counts.
    Substring,
    /// Any keyword appears as a case-insensitive whole word.
    KeywordSet,
}

/// Conformance examples shipped with an entry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternExamples {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternEntry {
    pub id: String,
    pub category: CategorySet,
    pub mode: MatchMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keywords: Option<Vec<String>>,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub examples: Option<PatternExamples>,
    #[serde(skip)]
    compiled: Option<Regex>,
}

impl PatternEntry {
    pub fn regex(
        id: impl Into<String>,
        category: PhiCategory,
        mode: MatchMode,
        expression: impl Into<String>,
    ) -> Result<Self> {
        let mut e = PatternEntry {
            id: id.into(),
            category: CategorySet::new(vec![category]),
            mode,
            expression: Some(expression.into()),
            keywords: None,
            description: String::new(),
            examples: None,
            compiled: None,
        };
        e.compile()?;
        Ok(e)
    }

    pub fn keyword_set<S: AsRef<str>>(
        id: impl Into<String>,
        category: PhiCategory,
        keywords: &[S],
    ) -> Result<Self> {
        let mut e = PatternEntry {
            id: id.into(),
            category: CategorySet::new(vec![category]),
            mode: MatchMode::KeywordSet,
            expression: None,
            keywords: Some(keywords.iter().map(|k| k.as_ref().to_string()).collect()),
            description: String::new(),
            examples: None,
            compiled: None,
        };
        e.compile()?;
        Ok(e)
    }

    fn compile(&mut self) -> Result<()> {
        let err = |message: String| Error::Pattern {
            id: self.id.clone(),
            message,
        };
        match self.mode {
            MatchMode::KeywordSet => {
                let kws = self
                    .keywords
                    .as_mut()
                    .ok_or_else(|| err("keyword-set entry without keywords".into()))?;
                if kws.is_empty() || kws.iter().any(|k| k.trim().is_empty()) {
                    return Err(err("keyword list must be non-empty".into()));
                }
                for k in kws.iter_mut() {
                    *k = k.trim().to_lowercase();
                }
                self.compiled = None;
            }
            MatchMode::Full | MatchMode::Substring => {
                let src = self
                    .expression
                    .as_deref()
                    .ok_or_else(|| err("regex entry without expression".into()))?;
                let anchored = match self.mode {
                    MatchMode::Full => format!("^(?:{src})$"),
                    _ => src.to_string(),
                };
                self.compiled = Some(Regex::new(&anchored).map_err(|e| err(e.to_string()))?);
            }
        }
        Ok(())
    }

    /// Test one non-null token against this entry.
    pub fn is_match(&self, value: &str) -> bool {
        match self.mode {
            MatchMode::Full => self
                .compiled
                .as_ref()
                .is_some_and(|re| re.is_match(value.trim())),
            MatchMode::Substring => self.compiled.as_ref().is_some_and(|re| re.is_match(value)),
            MatchMode::KeywordSet => {
                let lower = value.to_lowercase();
                self.keywords
                    .as_deref()
                    .unwrap_or_default()
                    .iter()
                    .any(|k| contains_whole_word(&lower, k))
            }
        }
    }
}

fn contains_whole_word(haystack: &str, word: &str) -> bool {
    let is_word = |c: char| c.is_alphanumeric();
    // A keyword that itself ends in punctuation (`st.`) carries its own
    // right boundary.
    let self_bounded = word.chars().next_back().is_some_and(|c| !is_word(c));
    let mut from = 0;
    while let Some(pos) = haystack[from..].find(word) {
        let start = from + pos;
        let end = start + word.len();
        let before_ok = haystack[..start].chars().next_back().is_none_or(|c| !is_word(c));
        let after_ok =
            self_bounded || haystack[end..].chars().next().is_none_or(|c| !is_word(c));
        if before_ok && after_ok {
            return true;
        }
        from = start + haystack[start..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

pub fn match_value(value: &str, entry: &PatternEntry) -> bool {
    entry.is_match(value)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternLibrary {
    pub version: String,
    pub entries: Vec<PatternEntry>,
}

impl PatternLibrary {
    pub fn new(version: impl Into<String>, entries: Vec<PatternEntry>) -> Result<Self> {
        let mut lib = PatternLibrary {
            version: version.into(),
            entries,
        };
        lib.validate_and_compile()?;
        Ok(lib)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let mut lib: PatternLibrary = serde_json::from_str(src)?;
        lib.validate_and_compile()?;
        Ok(lib)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&src)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn validate_and_compile(&mut self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &mut self.entries {
            if !seen.insert(e.id.clone()) {
                return Err(Error::Pattern {
                    id: e.id.clone(),
                    message: "duplicate id".into(),
                });
            }
            if e.category.is_empty() {
                return Err(Error::Pattern {
                    id: e.id.clone(),
                    message: "missing category".into(),
                });
            }
            e.compile()?;
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&PatternEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn covers(&self, cat: PhiCategory) -> bool {
        self.entries.iter().any(|e| e.category.contains(cat))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The embedded default library.
pub fn builtin_library() -> PatternLibrary {
    PatternLibrary::from_json(BUILTIN_JSON).expect("embedded pattern library is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegexVerdict {
    pub column_name: String,
    pub prob_phi: f64,
    pub best_pattern_id: Option<String>,
    pub per_pattern_fraction: BTreeMap<String, f64>,
    /// Set when the column had no non-null values to screen.
    #[serde(default)]
    pub no_data: bool,
}

impl RegexVerdict {
    pub fn no_data(column_name: impl Into<String>) -> Self {
        RegexVerdict {
            column_name: column_name.into(),
            prob_phi: 0.0,
            best_pattern_id: None,
            per_pattern_fraction: BTreeMap::new(),
            no_data: true,
        }
    }
}

pub fn screen_column(sample: &ColumnSample, library: &PatternLibrary) -> Result<RegexVerdict> {
    if sample.values.is_empty() {
        return Err(Error::EmptySample(sample.column_name.clone()));
    }
    let k = sample.values.len() as f64;
    let mut per_pattern_fraction = BTreeMap::new();
    let mut prob_phi = 0.0;
    let mut best_pattern_id = None;
    for entry in &library.entries {
        let hits = sample.values.iter().filter(|v| entry.is_match(v)).count();
        let frac = hits as f64 / k;
        // Strict comparison keeps the first entry in library order on ties.
        if frac > prob_phi {
            prob_phi = frac;
            best_pattern_id = Some(entry.id.clone());
        }
        per_pattern_fraction.insert(entry.id.clone(), frac);
    }
    Ok(RegexVerdict {
        column_name: sample.column_name.clone(),
        prob_phi,
        best_pattern_id,
        per_pattern_fraction,
        no_data: false,
    })
}

/// Screen every column; the output follows column order. Columns with no
/// data come back flagged rather than aborting the scan.
pub fn screen_dataset(
    dataset: &Dataset,
    library: &PatternLibrary,
    k: usize,
    seed: u64,
) -> Vec<RegexVerdict> {
    dataset
        .columns
        .par_iter()
        .map(|col| match sample_column(col, k, seed) {
            Ok(sample) => screen_column(&sample, library)
                .unwrap_or_else(|_| RegexVerdict::no_data(&col.name)),
            Err(_) => RegexVerdict::no_data(&col.name),
        })
        .collect()
}
