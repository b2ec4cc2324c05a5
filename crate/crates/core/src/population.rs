//! Declarative description of an audience segment.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExpatStatus {
    #[default]
    All,
    ExpatsAll,
    NonExpats,
    /// Expats originating from the given country.
    ExpatsFrom(String),
}

impl fmt::Display for ExpatStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpatStatus::All => f.write_str("all"),
            ExpatStatus::ExpatsAll => f.write_str("expats_all"),
            ExpatStatus::NonExpats => f.write_str("non_expats"),
            ExpatStatus::ExpatsFrom(country) => write!(f, "expats_from({country})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    #[default]
    All,
    Men,
    Women,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::All => "all",
            Gender::Men => "men",
            Gender::Women => "women",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Education {
    #[default]
    All,
    UniversityGraduate,
    NotUniversity,
}

impl fmt::Display for Education {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Education::All => "all",
            Education::UniversityGraduate => "university_graduate",
            Education::NotUniversity => "not_university",
        })
    }
}

pub const MIN_AGE: u8 = 13;
pub const MAX_AGE: u8 = 120;

/// An audience segment: who is being counted.
///
/// The label is a free-form name used in reports. Everything else feeds the
/// provider [fingerprint](PopulationSpec::fingerprint), which doubles as the
/// cache key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub label: String,
    pub country: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default)]
    pub expat_status: ExpatStatus,
    /// Inclusive `(min, max)` in years.
    #[serde(default = "default_age_range")]
    pub age_range: (u8, u8),
    #[serde(default)]
    pub gender: Gender,
    #[serde(default)]
    pub education: Education,
}

fn default_age_range() -> (u8, u8) {
    (18, 65)
}

impl PopulationSpec {
    /// Adults aged 18-65 of every gender and education level.
    pub fn new(label: impl Into<String>, country: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            country: country.into(),
            language: None,
            expat_status: ExpatStatus::All,
            age_range: default_age_range(),
            gender: Gender::All,
            education: Education::All,
        }
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }

    pub fn with_expat_status(mut self, status: ExpatStatus) -> Self {
        self.expat_status = status;
        self
    }

    pub fn with_age_range(mut self, min: u8, max: u8) -> Self {
        self.age_range = (min, max);
        self
    }

    pub fn with_gender(mut self, gender: Gender) -> Self {
        self.gender = gender;
        self
    }

    pub fn with_education(mut self, education: Education) -> Self {
        self.education = education;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.label.trim().is_empty() {
            return Err(Error::InvalidPopulation("label must be non-empty".into()));
        }
        let (min, max) = self.age_range;
        if !(MIN_AGE <= min && min <= max && max <= MAX_AGE) {
            return Err(Error::InvalidPopulation(format!(
                "{}: age range {min}-{max} outside {MIN_AGE}..={MAX_AGE} or inverted",
                self.label
            )));
        }
        Ok(())
    }

    /// `country|language|expat_status|age_min-age_max|gender|education`, lowercase.
    /// A missing language is written as `any`.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}|{}|{}|{}-{}|{}|{}",
            self.country,
            self.language.as_deref().unwrap_or("any"),
            self.expat_status,
            self.age_range.0,
            self.age_range.1,
            self.gender,
            self.education
        )
        .to_lowercase()
    }
}
