//! JSON audit report and its text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::ingest::ModelBundle;
use crate::model::decimal::{format_rational, probability};
use crate::model::{Ensemble, FeatureSpace, Point};
use crate::spec::{premise_subsumes, SpecBody, Specification};
use crate::verify::{Counterexample, Limits, Status, SuiteEntry};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Inputs echoed back into the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub model_path: Option<String>,
    pub space_path: Option<String>,
    pub specs_path: Option<String>,
    pub base_score: Option<String>,
    pub deterministic: bool,
    pub max_nodes: u64,
    pub timeout_s: f64,
}

impl ConfigEcho {
    pub fn with_limits(limits: &Limits) -> Self {
        ConfigEcho {
            deterministic: limits.deterministic,
            max_nodes: limits.max_nodes,
            timeout_s: limits.timeout.as_secs_f64(),
            ..ConfigEcho::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub source_format: String,
    pub trees: usize,
    pub leaves: usize,
    pub base_score: String,
    pub features: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

impl ModelSummary {
    pub fn of(ensemble: &Ensemble, bundle: Option<&ModelBundle>) -> Self {
        ModelSummary {
            source_format: bundle.map_or_else(|| "in-memory".into(), |b| b.source_format.to_string()),
            trees: ensemble.trees().len(),
            leaves: ensemble.leaf_count(),
            base_score: format_rational(ensemble.base_score()),
            features: ensemble.space().names().map(str::to_string).collect(),
            metadata: bundle.map(|b| b.metadata.clone()).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessPoint {
    /// Feature name to binary32 value, in feature order.
    pub point: Map<String, Value>,
    /// Exact logit as decimal text (or `n/d` when it does not terminate).
    pub logit: String,
    pub probability: f64,
    /// Probability rounded to a whole percent.
    pub percent: u32,
}

impl WitnessPoint {
    pub fn new(space: &FeatureSpace, point: &Point, logit: &num_rational::BigRational) -> Self {
        let p = probability(logit);
        WitnessPoint {
            point: point_map(space, point),
            logit: format_rational(logit),
            probability: p,
            percent: (p * 100.0).round() as u32,
        }
    }
}

pub fn point_map(space: &FeatureSpace, point: &Point) -> Map<String, Value> {
    space
        .names()
        .zip(point.coords())
        .map(|(name, x)| {
            let n: Number = x.to_string().parse().expect("binary32 display is a JSON number");
            (name.to_string(), Value::Number(n))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    #[serde(flatten)]
    pub first: WitnessPoint,
    /// Second point of a monotonicity counterexample: same coordinates
    /// except the monotone feature, which is larger.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<WitnessPoint>,
}

impl WitnessReport {
    pub fn new(space: &FeatureSpace, w: &Counterexample) -> Self {
        WitnessReport {
            first: WitnessPoint::new(space, &w.points[0], &w.logits[0]),
            second: w.points.get(1).map(|p| WitnessPoint::new(space, p, &w.logits[1])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub nodes: u64,
    pub max_depth: u32,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecReport {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// `proven`, `violated`, `inconclusive`, `exhausted` or `error`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsReport>,
    /// Trees failing the per-tree monotonicity check.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub non_monotone_trees: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub tool: ToolInfo,
    pub config: ConfigEcho,
    pub model: ModelSummary,
    pub specs: Vec<SpecReport>,
    pub notes: Vec<String>,
}

impl AuditReport {
    /// Builds the report. With `limits.deterministic` set, elapsed times are
    /// reported as 0 so that identical inputs serialize identically.
    pub fn new(model: ModelSummary, config: ConfigEcho, space: &FeatureSpace, suite: &[SuiteEntry]) -> Self {
        let zero_time = config.deterministic;
        let specs = suite.iter().map(|e| spec_report(space, e, zero_time)).collect();
        let parsed: Vec<&Specification> = suite.iter().filter_map(|e| e.spec.as_ref()).collect();
        AuditReport {
            tool: ToolInfo::default(),
            config,
            model,
            specs,
            notes: subsumption_notes(&parsed, space),
        }
    }

    /// 0 when every spec is proven, 1 when at least one is violated and none
    /// errored, 2 on any error, exhausted search or inconclusive result.
    pub fn exit_code(&self) -> i32 {
        let statuses = || self.specs.iter().map(|s| s.status.as_str());
        if statuses().any(|s| matches!(s, "error" | "exhausted" | "inconclusive")) {
            2
        } else if statuses().any(|s| s == "violated") {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.model;
        let _ = writeln!(
            out,
            "model: {} trees, {} leaves, base score {} ({})",
            m.trees, m.leaves, m.base_score, m.source_format
        );
        for s in &self.specs {
            let _ = write!(out, "{:<12} {:<12}", s.id, s.status.to_uppercase());
            if let Some(d) = &s.description {
                let _ = write!(out, " {d}");
            }
            if let Some(method) = &s.method {
                let _ = write!(out, " [{method}]");
            }
            out.push('\n');
            if let Some(w) = &s.witness {
                for p in std::iter::once(&w.first).chain(&w.second) {
                    let coords: Vec<String> = p.point.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    let _ = writeln!(
                        out,
                        "    witness {} -> logit {} ({}%)",
                        coords.join(" "),
                        p.logit,
                        p.percent
                    );
                }
            }
            if let Some(st) = &s.stats {
                let _ = writeln!(out, "    nodes {} depth {} time {} ms", st.nodes, st.max_depth, st.elapsed_ms);
                for n in &st.notes {
                    let _ = writeln!(out, "    note: {n}");
                }
            }
            if !s.non_monotone_trees.is_empty() {
                let _ = writeln!(out, "    trees failing the per-tree check: {:?}", s.non_monotone_trees);
            }
            if let Some(e) = &s.error {
                let _ = writeln!(out, "    error: {e}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

fn spec_report(space: &FeatureSpace, entry: &SuiteEntry, zero_time: bool) -> SpecReport {
    let mut report = SpecReport {
        id: entry.id.clone(),
        kind: entry.spec.as_ref().map(|s| s.kind().to_string()),
        description: entry.spec.as_ref().map(|s| s.describe(space)),
        status: String::new(),
        method: None,
        witness: None,
        stats: None,
        non_monotone_trees: Vec::new(),
        error: None,
    };
    match &entry.outcome {
        Ok(result) => {
            let v = &result.verdict;
            report.status = v.status.to_string();
            report.method = Some(result.method.to_string());
            report.witness = v.witness.as_ref().map(|w| WitnessReport::new(space, w));
            report.stats = Some(StatsReport {
                nodes: v.stats.nodes_explored,
                max_depth: v.stats.max_depth,
                elapsed_ms: if zero_time { 0 } else { v.stats.elapsed.as_millis() as u64 },
                notes: v.stats.notes.clone(),
            });
            report.non_monotone_trees = result.dirty_trees.iter().map(|t| t.tree).collect();
        }
        Err(e) => {
            report.status = match e {
                Error::ResourceExhausted { .. } => "exhausted",
                _ => "error",
            }
            .into();
            report.error = Some(e.to_string());
        }
    }
    report
}

/// Notes such as "C proves D" for implication specs whose premises nest.
pub fn subsumption_notes(specs: &[&Specification], space: &FeatureSpace) -> Vec<String> {
    let implications: Vec<(&str, &crate::spec::ThresholdImplication)> = specs
        .iter()
        .filter_map(|s| match &s.body {
            SpecBody::Implication(t) => Some((s.id.as_str(), t)),
            SpecBody::Monotone(_) => None,
        })
        .collect();
    let subsumes = |a: usize, b: usize| premise_subsumes(implications[a].1, implications[b].1, space).unwrap_or(false);
    let mut notes = Vec::new();
    for i in 0..implications.len() {
        for j in 0..implications.len() {
            if i == j || !subsumes(i, j) {
                continue;
            }
            let (a, b) = (implications[i].0, implications[j].0);
            if subsumes(j, i) {
                if i < j {
                    notes.push(format!("{a} and {b} have equivalent premises"));
                }
            } else {
                notes.push(format!("{a} proves {b}: every input satisfying the premise of {b} satisfies that of {a}"));
            }
        }
    }
    notes
}

/// Status string used in reports for a verdict status.
pub fn status_label(status: Status) -> &'static str {
    match status {
        Status::Proven => "proven",
        Status::Violated => "violated",
        Status::Inconclusive => "inconclusive",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_spec_entries;
    use crate::testing::{worked_example, worked_space};
    use crate::verify::verify_suite;

    const SPECS: &str = r#"{"specs": [
        {"id": "A", "kind": "implication", "premise": ["g > 5.0"]},
        {"id": "B", "kind": "monotone", "feature": "p", "direction": "non-decreasing"},
        {"id": "C", "kind": "implication", "premise": ["l > 2.5", "p < 0.35"]},
        {"id": "D", "kind": "implication", "premise": ["s < 0.1", "l > 2.5", "p < 0.35"]}
    ]}"#;

    fn report() -> AuditReport {
        let space = worked_space();
        let model = worked_example();
        let entries = parse_spec_entries(SPECS, &space).unwrap();
        let suite = verify_suite(&model, &entries, &Limits::deterministic());
        AuditReport::new(
            ModelSummary::of(&model, None),
            ConfigEcho::with_limits(&Limits::deterministic()),
            &space,
            &suite,
        )
    }

    #[test]
    fn json_shape() {
        let r = report();
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["model"]["trees"], 2);
        assert_eq!(v["model"]["leaves"], 6);
        assert_eq!(v["model"]["base_score"], "0");
        let a = &v["specs"][0];
        assert_eq!(a["id"], "A");
        assert_eq!(a["status"], "violated");
        assert_eq!(a["witness"]["logit"], "0.25");
        assert_eq!(a["witness"]["percent"], 56);
        let keys: Vec<&String> = a["witness"]["point"].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["g", "l", "s", "p"]);
        assert_eq!(a["stats"]["elapsed_ms"], 0);
        assert_eq!(v["specs"][1]["status"], "proven");
        assert_eq!(v["specs"][1]["method"], "per-tree");
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn deterministic_serialization() {
        assert_eq!(report().to_json(), report().to_json());
    }

    #[test]
    fn c_proves_d() {
        let r = report();
        assert!(r.notes.iter().any(|n| n.starts_with("C proves D")), "{:?}", r.notes);
        assert!(!r.notes.iter().any(|n| n.starts_with("D proves C")));
        assert!(r.to_text().contains("note: C proves D"));
    }

    #[test]
    fn exit_codes() {
        let mut r = report();
        r.specs.retain(|s| s.status == "proven");
        assert_eq!(r.exit_code(), 0);
        r.specs[0].status = "exhausted".into();
        assert_eq!(r.exit_code(), 2);
        let mut r = report();
        r.specs[2].status = "error".into();
        assert_eq!(r.exit_code(), 2);
    }
}
