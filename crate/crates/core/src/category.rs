//! The eighteen HIPAA Safe Harbor identifier categories, keyed by their
//! conventional letters (A) Names through (R) Other unique identifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhiCategory {
    Names,
    Geographic,
    Dates,
    Telephone,
    Fax,
    Email,
    SocialSecurity,
    MedicalRecord,
    HealthPlan,
    Account,
    License,
    Vehicle,
    Device,
    Url,
    IpAddress,
    Biometric,
    Photograph,
    OtherUnique,
}

impl PhiCategory {
    pub const ALL: [PhiCategory; 18] = [
        PhiCategory::Names,
        PhiCategory::Geographic,
        PhiCategory::Dates,
        PhiCategory::Telephone,
        PhiCategory::Fax,
        PhiCategory::Email,
        PhiCategory::SocialSecurity,
        PhiCategory::MedicalRecord,
        PhiCategory::HealthPlan,
        PhiCategory::Account,
        PhiCategory::License,
        PhiCategory::Vehicle,
        PhiCategory::Device,
        PhiCategory::Url,
        PhiCategory::IpAddress,
        PhiCategory::Biometric,
        PhiCategory::Photograph,
        PhiCategory::OtherUnique,
    ];

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    pub fn from_letter(c: char) -> Option<Self> {
        let c = c.to_ascii_uppercase();
        if !c.is_ascii_uppercase() {
            return None;
        }
        Self::ALL.get((c as u8 - b'A') as usize).copied()
    }

    pub fn description(self) -> &'static str {
        match self {
            PhiCategory::Names => "names",
            PhiCategory::Geographic => "geographic subdivisions",
            PhiCategory::Dates => "dates and ages over 89",
            PhiCategory::Telephone => "telephone numbers",
            PhiCategory::Fax => "fax numbers",
            PhiCategory::Email => "email addresses",
            PhiCategory::SocialSecurity => "social security numbers",
            PhiCategory::MedicalRecord => "medical record numbers",
            PhiCategory::HealthPlan => "health plan beneficiary numbers",
            PhiCategory::Account => "account numbers",
            PhiCategory::License => "certificate/license numbers",
            PhiCategory::Vehicle => "vehicle identifiers",
            PhiCategory::Device => "device identifiers",
            PhiCategory::Url => "web URLs",
            PhiCategory::IpAddress => "IP addresses",
            PhiCategory::Biometric => "biometric identifiers",
            PhiCategory::Photograph => "full-face photographs",
            PhiCategory::OtherUnique => "other unique identifiers",
        }
    }
}

impl fmt::Display for PhiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for PhiCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                Self::from_letter(c).ok_or_else(|| format!("unknown PHI category `{s}`"))
            }
            _ => Err(format!("unknown PHI category `{s}`")),
        }
    }
}

impl Serialize for PhiCategory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PhiCategory {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One or more categories written as `D/E` or `H/I/J`, used by pattern
/// entries that cover a family of identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategorySet(Vec<PhiCategory>);

impl CategorySet {
    pub fn new(mut cats: Vec<PhiCategory>) -> Self {
        cats.sort();
        cats.dedup();
        CategorySet(cats)
    }

    pub fn contains(&self, cat: PhiCategory) -> bool {
        self.0.contains(&cat)
    }

    pub fn iter(&self) -> impl Iterator<Item = PhiCategory> + '_ {
        self.0.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for CategorySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for CategorySet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cats = s
            .split('/')
            .map(str::parse)
            .collect::<Result<Vec<PhiCategory>, _>>()?;
        if cats.is_empty() {
            return Err("empty category set".into());
        }
        Ok(CategorySet::new(cats))
    }
}

impl Serialize for CategorySet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CategorySet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
