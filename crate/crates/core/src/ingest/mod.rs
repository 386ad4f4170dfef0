//! Reading models, feature spaces and prediction fixtures from disk formats.

mod additive;
mod fixture;
mod gbt;
mod json;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde_json::Value;

pub use additive::{parse_additive_dump, to_additive_dump};
pub use fixture::{parse_fixture, validate_against_fixture, write_fixture, FailingRow, FixtureReport, FixtureRow, PredictionFixture};
pub use gbt::{parse_gbt_dump, parse_gbt_dump_with, to_gbt_dump, GbtOptions};

use crate::model::{AdditiveModel, Ensemble, FeatureSpace, LogitModel};
use crate::{Error, Result};

/// Reads `{"features": [{"name", "lower", "upper"}, ...]}`. Decimal bounds
/// are rounded inward to binary32.
pub fn parse_space_config(text: &str) -> Result<FeatureSpace> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::InvalidSpace(format!("invalid JSON: {e}")))?;
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidSpace("expected an object with a `features` array".into()))?;
    let mut bounds: Vec<(String, BigRational, BigRational)> = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        let name = f
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidSpace(format!("feature {i} lacks a string `name`")))?;
        let bound = |key: &str| {
            f.get(key)
                .and_then(json::rational)
                .ok_or_else(|| Error::InvalidSpace(format!("feature `{name}` lacks a numeric `{key}`")))
        };
        bounds.push((name.to_string(), bound("lower")?, bound("upper")?));
    }
    let refs: Vec<(&str, &BigRational, &BigRational)> = bounds.iter().map(|(n, l, u)| (n.as_str(), l, u)).collect();
    FeatureSpace::from_decimal_bounds(&refs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    GbtDump,
    AdditiveDump,
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceFormat::GbtDump => "gbt-dump",
            SourceFormat::AdditiveDump => "additive-dump",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelPayload {
    Ensemble(Ensemble),
    Additive(AdditiveModel),
}

/// A parsed model plus where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub model: ModelPayload,
    pub source_format: SourceFormat,
    pub metadata: BTreeMap<String, String>,
}

impl ModelBundle {
    /// Parses either dump format, told apart by the top-level JSON shape: an
    /// array is a gradient-boosted dump, an object an additive dump. The
    /// base score is required for the former and ignored for the latter.
    pub fn load(text: &str, base_score: Option<&str>, space: &FeatureSpace, options: GbtOptions) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('[') {
            let model = parse_gbt_dump_with(text, base_score, space, options)?;
            Ok(ModelBundle {
                model: ModelPayload::Ensemble(model),
                source_format: SourceFormat::GbtDump,
                metadata: BTreeMap::new(),
            })
        } else {
            let model = parse_additive_dump(text, space)?;
            let metadata = json::parse_json(text)?
                .get("metadata")
                .and_then(Value::as_object)
                .map(|m| {
                    m.iter()
                        .map(|(k, v)| (k.clone(), v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())))
                        .collect()
                })
                .unwrap_or_default();
            Ok(ModelBundle {
                model: ModelPayload::Additive(model),
                source_format: SourceFormat::AdditiveDump,
                metadata,
            })
        }
    }

    /// The model as an ensemble; additive models are compiled.
    pub fn ensemble(&self) -> Ensemble {
        match &self.model {
            ModelPayload::Ensemble(e) => e.clone(),
            ModelPayload::Additive(a) => a.compile(),
        }
    }

    pub fn logit_model(&self) -> &dyn LogitModel {
        match &self.model {
            ModelPayload::Ensemble(e) => e,
            ModelPayload::Additive(a) => a,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_config_round_inward() {
        let text = r#"{"features": [{"name": "g", "lower": 0.37, "upper": 6.05}, {"name": "p", "lower": "0.33", "upper": 0.57}]}"#;
        let space = parse_space_config(text).unwrap();
        assert_eq!(space.len(), 2);
        assert!(space.feature(0).lower.get() >= 0.37);
        assert!((space.feature(0).upper.get() as f64) <= 6.05);
        assert!(parse_space_config(r#"{"features": []}"#).is_err());
        assert!(parse_space_config(r#"{"features": [{"name": "g", "lower": 1}]}"#).is_err());
        assert!(parse_space_config("[]").is_err());
    }

    #[test]
    fn bundle_detects_format() {
        let space = crate::testing::worked_space();
        let gbt = ModelBundle::load("[]", Some("0"), &space, GbtOptions::default()).unwrap();
        assert_eq!(gbt.source_format, SourceFormat::GbtDump);
        assert_eq!(
            ModelBundle::load("[]", None, &space, GbtOptions::default()),
            Err(Error::MissingBaseScore)
        );
        let add = ModelBundle::load(
            r#"{"intercept": 1, "terms": [], "metadata": {"accuracy": "0.801", "bins": 12}}"#,
            None,
            &space,
            GbtOptions::default(),
        )
        .unwrap();
        assert_eq!(add.source_format, SourceFormat::AdditiveDump);
        assert_eq!(add.metadata["accuracy"], "0.801");
        assert_eq!(add.metadata["bins"], "12");
        assert_eq!(add.ensemble().trees().len(), 0);
    }
}
