use std::fmt;

use super::monotone::{check_monotone_direct, check_monotone_per_tree, TreeDefect};
use super::threshold::check_threshold_spec;
use super::{Limits, Status, Verdict};
use crate::model::Ensemble;
use crate::spec::{SpecBody, SpecEntry, Specification};
use crate::{Error, Result};

/// Which procedure produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BranchAndBound,
    PerTree,
    Direct,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::BranchAndBound => "branch-and-bound",
            Method::PerTree => "per-tree",
            Method::Direct => "direct",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecResult {
    pub verdict: Verdict,
    pub method: Method,
    /// Trees that failed the per-tree check before falling back to the
    /// direct one.
    pub dirty_trees: Vec<TreeDefect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub id: String,
    pub spec: Option<Specification>,
    pub outcome: Result<SpecResult>,
}

fn check_spec(model: &Ensemble, spec: &Specification, limits: &Limits) -> Result<SpecResult> {
    let d = model.space().len();
    match &spec.body {
        SpecBody::Implication(t) => {
            if let Some(a) = t.premise.iter().find(|a| a.feature >= d) {
                return Err(Error::UnknownFeature(format!("#{}", a.feature)));
            }
            Ok(SpecResult {
                verdict: check_threshold_spec(model, t, limits)?,
                method: Method::BranchAndBound,
                dirty_trees: Vec::new(),
            })
        }
        SpecBody::Monotone(m) => {
            let per_tree = check_monotone_per_tree(model, m.feature, m.direction)?;
            if per_tree.verdict.status != Status::Inconclusive {
                return Ok(SpecResult {
                    verdict: per_tree.verdict,
                    method: Method::PerTree,
                    dirty_trees: Vec::new(),
                });
            }
            let mut verdict = check_monotone_direct(model, m.feature, m.direction, limits)?;
            verdict.stats.notes.push(format!(
                "per-tree check inconclusive on {} tree(s)",
                per_tree.dirty_trees.len()
            ));
            Ok(SpecResult {
                verdict,
                method: Method::Direct,
                dirty_trees: per_tree.dirty_trees,
            })
        }
    }
}

/// Runs every entry in order. Monotonicity specs try the per-tree check
/// first and fall back to the direct check when it is inconclusive. A
/// failing entry does not stop the others.
pub fn verify_suite(model: &Ensemble, specs: &[SpecEntry], limits: &Limits) -> Vec<SuiteEntry> {
    specs
        .iter()
        .map(|entry| SuiteEntry {
            id: entry.id.clone(),
            spec: entry.spec.as_ref().ok().cloned(),
            outcome: entry.spec.clone().and_then(|spec| check_spec(model, &spec, limits)),
        })
        .collect()
}

pub fn verify_specs(model: &Ensemble, specs: &[Specification], limits: &Limits) -> Vec<SuiteEntry> {
    let entries: Vec<SpecEntry> = specs.iter().cloned().map(SpecEntry::from).collect();
    verify_suite(model, &entries, limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use crate::spec::{parse_spec_entries, Direction, Monotonicity};
    use crate::testing::{worked_example, worked_space};

    const FOUR_SPECS: &str = r#"{"specs": [
        {"id": "A", "kind": "implication", "premise": ["g > 5.0"], "conclusion": "logit <= 0"},
        {"id": "B", "kind": "monotone", "feature": "p", "direction": "non-decreasing"},
        {"id": "C", "kind": "implication", "premise": ["l > 2.5", "p < 0.35"], "conclusion": "logit <= 0"},
        {"id": "D", "kind": "implication", "premise": ["s < 0.1", "l > 2.5", "p < 0.35"], "conclusion": "logit <= 0"}
    ]}"#;

    #[test]
    fn four_specs_on_worked_example() {
        let entries = parse_spec_entries(FOUR_SPECS, &worked_space()).unwrap();
        let report = verify_suite(&worked_example(), &entries, &Limits::deterministic());
        let ids: Vec<&str> = report.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["A", "B", "C", "D"]);
        let statuses: Vec<Status> = report.iter().map(|e| e.outcome.as_ref().unwrap().verdict.status).collect();
        assert_eq!(statuses, [Status::Violated, Status::Proven, Status::Proven, Status::Proven]);
        assert_eq!(report[1].outcome.as_ref().unwrap().method, Method::PerTree);
    }

    #[test]
    fn empty_suite() {
        assert!(verify_suite(&worked_example(), &[], &Limits::default()).is_empty());
    }

    #[test]
    fn bad_entry_is_isolated() {
        let text = r#"{"specs": [
            {"id": "x", "kind": "implication", "premise": ["depth > 2"]},
            {"id": "A", "kind": "implication", "premise": ["g > 5.0"]}
        ]}"#;
        let entries = parse_spec_entries(text, &worked_space()).unwrap();
        let report = verify_suite(&worked_example(), &entries, &Limits::default());
        assert!(report[0].outcome.is_err());
        assert!(report[1].outcome.as_ref().unwrap().verdict.is_violated());
    }

    #[test]
    fn fallback_to_direct() {
        use crate::model::decimal::parse_decimal;
        use crate::model::{Binary32, TreeNode};
        let step = |a: &str, b: &str| {
            TreeNode::split(
                3,
                Binary32::new(0.4).unwrap(),
                TreeNode::leaf(parse_decimal(a).unwrap()),
                TreeNode::leaf(parse_decimal(b).unwrap()),
            )
        };
        let m = Ensemble::new(worked_space(), BigRational::from_integer(0.into()), vec![step("1", "0"), step("0", "2")]).unwrap();
        let spec = Specification {
            id: "mono".into(),
            body: SpecBody::Monotone(Monotonicity {
                feature: 3,
                direction: Direction::NonDecreasing,
            }),
        };
        let report = verify_specs(&m, &[spec], &Limits::default());
        let result = report[0].outcome.as_ref().unwrap();
        assert_eq!(result.method, Method::Direct);
        assert!(result.verdict.is_proven());
        assert_eq!(result.dirty_trees.len(), 1);
    }
}
