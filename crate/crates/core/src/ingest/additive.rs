//! Additive-model dumps:
//! `{"intercept": c, "terms": [{"features": [..], "edges": [..], "scores": [..]}]}`.
//! Univariate terms use flat `edges`/`scores`; pairwise terms use one edge
//! list per axis and a row-major score grid.

use num_rational::BigRational;
use serde_json::{Map, Number, Value};

use super::gbt::weight_text;
use super::json::{parse_json, rational, rational_field};
use crate::model::{AdditiveModel, Binary32, FeatureSpace, PairwiseTerm, UnivariateTerm};
use crate::{Error, Result};

pub fn parse_additive_dump(text: &str, space: &FeatureSpace) -> Result<AdditiveModel> {
    let root = parse_json(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::MalformedDump("additive dump must be a JSON object".into()))?;
    let intercept = rational_field(obj, "intercept", "additive dump")?;
    let terms = obj
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedDump("additive dump lacks a `terms` array".into()))?;
    let mut univariate = Vec::new();
    let mut pairwise = Vec::new();
    for (i, term) in terms.iter().enumerate() {
        let t = term
            .as_object()
            .ok_or_else(|| Error::MalformedDump(format!("term {i} is not an object")))?;
        let names: Vec<&str> = t
            .get("features")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_str).collect())
            .unwrap_or_default();
        let features = names.iter().map(|n| space.resolve(n)).collect::<Result<Vec<_>>>()?;
        let label = names.join(" x ");
        match features.as_slice() {
            [f] => {
                let edges = edge_list(t.get("edges"), &label)?;
                let scores = score_list(t.get("scores"), &label)?;
                univariate.push(UnivariateTerm { feature: *f, edges, scores });
            }
            [a, b] => {
                let axes = t
                    .get("edges")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::MalformedDump(format!("term {label}: pairwise `edges` must hold two lists")))?;
                let first = edge_list(Some(&axes[0]), &label)?;
                let second = edge_list(Some(&axes[1]), &label)?;
                let rows = t
                    .get("scores")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::MalformedDump(format!("term {label}: `scores` must be a 2-D array")))?
                    .iter()
                    .map(|row| score_list(Some(row), &label))
                    .collect::<Result<Vec<_>>>()?;
                pairwise.push(PairwiseTerm {
                    features: (*a, *b),
                    edges: (first, second),
                    scores: rows,
                });
            }
            _ => {
                return Err(Error::MalformedDump(format!(
                    "term {i}: `features` must name one or two features"
                )))
            }
        }
    }
    AdditiveModel::new(space.clone(), intercept, univariate, pairwise)
}

fn edge_list(value: Option<&Value>, label: &str) -> Result<Vec<Binary32>> {
    let items = value
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedDump(format!("term {label}: `edges` must be an array")))?;
    let edges = items
        .iter()
        .map(|v| {
            let r = rational(v).ok_or_else(|| Error::MalformedDump(format!("term {label}: edge {v} is not a number")))?;
            Binary32::round_nearest(&r).ok_or_else(|| Error::NonRepresentable(v.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonAscendingEdges(label.to_string()));
    }
    Ok(edges)
}

fn score_list(value: Option<&Value>, label: &str) -> Result<Vec<BigRational>> {
    value
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedDump(format!("term {label}: `scores` must be an array")))?
        .iter()
        .map(|v| rational(v).ok_or_else(|| Error::MalformedDump(format!("term {label}: score {v} is not a number"))))
        .collect()
}

fn number(text: &str) -> Value {
    Value::Number(text.parse::<Number>().expect("decimal text"))
}

fn edges_json(edges: &[Binary32]) -> Value {
    Value::Array(edges.iter().map(|e| number(&format!("{:e}", e.get()))).collect())
}

fn scores_json(scores: &[BigRational]) -> Value {
    Value::Array(scores.iter().map(|s| number(&weight_text(s))).collect())
}

/// Writes the dump format read by [`parse_additive_dump`].
pub fn to_additive_dump(model: &AdditiveModel) -> String {
    let space = crate::model::LogitModel::space(model);
    let name = |i: usize| Value::from(space.feature(i).name.clone());
    let mut terms = Vec::new();
    for t in model.univariate() {
        let mut obj = Map::new();
        obj.insert("features".into(), Value::Array(vec![name(t.feature)]));
        obj.insert("edges".into(), edges_json(&t.edges));
        obj.insert("scores".into(), scores_json(&t.scores));
        terms.push(Value::Object(obj));
    }
    for t in model.pairwise() {
        let mut obj = Map::new();
        obj.insert("features".into(), Value::Array(vec![name(t.features.0), name(t.features.1)]));
        obj.insert("edges".into(), Value::Array(vec![edges_json(&t.edges.0), edges_json(&t.edges.1)]));
        obj.insert("scores".into(), Value::Array(t.scores.iter().map(|r| scores_json(r)).collect()));
        terms.push(Value::Object(obj));
    }
    let mut root = Map::new();
    root.insert("intercept".into(), number(&weight_text(model.intercept())));
    root.insert("terms".into(), Value::Array(terms));
    serde_json::to_string_pretty(&Value::Object(root)).expect("serializable")
}
