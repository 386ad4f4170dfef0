use serde_json::Value;

use super::{
    Atom, CmpOp, Direction, LogitCondition, LogitOp, Monotonicity, SpecBody, SpecEntry, Specification, ThresholdImplication,
};
use crate::model::decimal::parse_decimal;
use crate::model::FeatureSpace;
use crate::{Error, Result};

/// Splits `<lhs> <op> <decimal>`; returns (lhs, op, rhs, byte offset of rhs).
fn split_comparison(text: &str) -> Option<(&str, &str, &str, usize)> {
    let pos = text.find(['<', '>'])?;
    let op_len = if text[pos + 1..].starts_with('=') { 2 } else { 1 };
    let rhs_start = pos + op_len;
    Some((&text[..pos], &text[pos..rhs_start], &text[rhs_start..], rhs_start))
}

/// Parses one premise atom such as `gwd > 5.0`.
pub fn parse_atom(text: &str, space: &FeatureSpace, spec_id: &str) -> Result<Atom> {
    let malformed = |position: usize, reason: &str| Error::MalformedAtom {
        spec: spec_id.to_string(),
        atom: text.to_string(),
        position,
        reason: reason.to_string(),
    };
    let (lhs, op_text, rhs, rhs_at) =
        split_comparison(text).ok_or_else(|| malformed(0, "expected one of <, <=, >, >="))?;
    let name = lhs.trim();
    if name.is_empty() {
        return Err(malformed(0, "missing feature name"));
    }
    let feature = space.resolve(name)?;
    let op = match op_text {
        "<" => CmpOp::Lt,
        "<=" => CmpOp::Le,
        ">" => CmpOp::Gt,
        ">=" => CmpOp::Ge,
        _ => unreachable!("split_comparison yields a comparison operator"),
    };
    let value = parse_decimal(rhs).ok_or_else(|| malformed(rhs_at, "expected a decimal constant"))?;
    let constant = op
        .binary32_constant(&value)
        .ok_or_else(|| malformed(rhs_at, "constant outside the binary32 range"))?;
    Ok(Atom { feature, op, constant })
}

fn parse_conclusion(text: &str, spec_id: &str) -> Result<LogitCondition> {
    let malformed = |position: usize, reason: &str| Error::MalformedAtom {
        spec: spec_id.to_string(),
        atom: text.to_string(),
        position,
        reason: reason.to_string(),
    };
    let (lhs, op, rhs, rhs_at) = split_comparison(text).ok_or_else(|| malformed(0, "expected `logit <= c` or `logit > c`"))?;
    if lhs.trim() != "logit" {
        return Err(malformed(0, "conclusions constrain `logit`"));
    }
    let op = match op {
        "<=" => LogitOp::Le,
        ">" => LogitOp::Gt,
        _ => return Err(malformed(lhs.len(), "conclusion operator must be <= or >")),
    };
    let constant = parse_decimal(rhs).ok_or_else(|| malformed(rhs_at, "expected a decimal constant"))?;
    Ok(LogitCondition { op, constant })
}

/// Parses a specification file, preserving file order. Fails on the first
/// bad entry.
pub fn parse_specs(text: &str, space: &FeatureSpace) -> Result<Vec<Specification>> {
    parse_spec_entries(text, space)?.into_iter().map(|e| e.spec).collect()
}

/// Parses a specification file, keeping per-entry errors so that one bad
/// entry does not hide the others. Only file-level problems fail outright.
pub fn parse_spec_entries(text: &str, space: &FeatureSpace) -> Result<Vec<SpecEntry>> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::MalformedSpecs(e.to_string()))?;
    let entries = root
        .get("specs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedSpecs("expected an object with a `specs` array".into()))?;
    Ok(entries
        .iter()
        .enumerate()
        .map(|(i, entry)| SpecEntry {
            id: entry.get("id").and_then(Value::as_str).map_or_else(|| format!("#{i}"), str::to_string),
            spec: parse_entry(i, entry, space),
        })
        .collect())
}

fn parse_entry(index: usize, entry: &Value, space: &FeatureSpace) -> Result<Specification> {
    let id = entry
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::MalformedSpecs(format!("spec #{index} lacks a string `id`")))?
        .to_string();
    let field = |key: &str| {
        entry
            .get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| Error::MalformedSpecs(format!("spec {id}: `{key}` must be a string")))
    };
    let body = match field("kind")? {
        "implication" => {
            let premise = match entry.get("premise") {
                None | Some(Value::Null) => Vec::new(),
                Some(Value::Array(atoms)) => atoms
                    .iter()
                    .map(|a| {
                        a.as_str()
                            .ok_or_else(|| Error::MalformedSpecs(format!("spec {id}: premise atoms must be strings")))
                            .and_then(|s| parse_atom(s, space, &id))
                    })
                    .collect::<Result<Vec<_>>>()?,
                Some(_) => return Err(Error::MalformedSpecs(format!("spec {id}: `premise` must be an array"))),
            };
            let conclusion = match entry.get("conclusion") {
                None => LogitCondition::non_positive(),
                Some(_) => parse_conclusion(field("conclusion")?, &id)?,
            };
            SpecBody::Implication(ThresholdImplication { premise, conclusion })
        }
        "monotone" => {
            let feature = space.resolve(field("feature")?)?;
            let direction = Direction::parse(field("direction")?)?;
            SpecBody::Monotone(Monotonicity { feature, direction })
        }
        other => return Err(Error::MalformedSpecs(format!("spec {id}: unknown kind `{other}`"))),
    };
    Ok(Specification { id, body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Binary32;
    use crate::testing::worked_space;

    #[test]
    fn threshold_spec() {
        let text = r#"{"specs": [{"id": "A", "kind": "implication", "premise": ["g > 5.0"], "conclusion": "logit <= 0"}]}"#;
        let specs = parse_specs(text, &worked_space()).unwrap();
        assert_eq!(specs.len(), 1);
        match &specs[0].body {
            SpecBody::Implication(t) => {
                assert_eq!(t.premise, vec![Atom { feature: 0, op: CmpOp::Gt, constant: Binary32::new(5.0).unwrap() }]);
                assert_eq!(t.conclusion, LogitCondition::non_positive());
            }
            _ => panic!("expected implication"),
        }
    }

    #[test]
    fn monotone_spec() {
        let text = r#"{"specs": [{"id": "B", "kind": "monotone", "feature": "p", "direction": "non-decreasing"}]}"#;
        let specs = parse_specs(text, &worked_space()).unwrap();
        assert_eq!(specs[0].body, SpecBody::Monotone(Monotonicity { feature: 3, direction: Direction::NonDecreasing }));
    }

    #[test]
    fn empty_premise() {
        let text = r#"{"specs": [{"id": "never", "kind": "implication", "premise": [], "conclusion": "logit <= 0"}]}"#;
        let specs = parse_specs(text, &worked_space()).unwrap();
        assert_eq!(specs[0].describe(&worked_space()), "true => logit <= 0");
    }

    #[test]
    fn order_is_preserved() {
        let text = r#"{"specs": [
            {"id": "z", "kind": "monotone", "feature": "g", "direction": "non-increasing"},
            {"id": "a", "kind": "implication", "premise": ["s<0.1", "l >= 2"]}
        ]}"#;
        let ids: Vec<String> = parse_specs(text, &worked_space()).unwrap().into_iter().map(|s| s.id).collect();
        assert_eq!(ids, ["z", "a"]);
    }

    #[test]
    fn errors_carry_positions() {
        let space = worked_space();
        assert_eq!(parse_atom("depth > 1", &space, "X"), Err(Error::UnknownFeature("depth".into())));
        match parse_atom("g > five", &space, "X") {
            Err(Error::MalformedAtom { position, spec, .. }) => {
                assert_eq!(position, 3);
                assert_eq!(spec, "X");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_atom("g = 1", &space, "X"), Err(Error::MalformedAtom { position: 0, .. })));
        assert!(matches!(parse_atom("< 1", &space, "X"), Err(Error::MalformedAtom { .. })));
        let bad_dir = r#"{"specs": [{"id": "B", "kind": "monotone", "feature": "p", "direction": "up"}]}"#;
        assert_eq!(parse_specs(bad_dir, &space), Err(Error::UnknownDirection("up".into())));
        let bad_conclusion = r#"{"specs": [{"id": "A", "kind": "implication", "premise": [], "conclusion": "logit < 0"}]}"#;
        assert!(matches!(parse_specs(bad_conclusion, &space), Err(Error::MalformedAtom { .. })));
        assert!(matches!(parse_specs("{}", &space), Err(Error::MalformedSpecs(_))));
        assert!(matches!(parse_specs(r#"{"specs": [{"kind": "monotone"}]}"#, &space), Err(Error::MalformedSpecs(_))));
    }

    #[test]
    fn entries_isolate_errors() {
        let text = r#"{"specs": [
            {"id": "ok", "kind": "monotone", "feature": "g", "direction": "non-increasing"},
            {"id": "bad", "kind": "implication", "premise": ["depth > 1"]},
            {"kind": "implication"}
        ]}"#;
        let entries = parse_spec_entries(text, &worked_space()).unwrap();
        assert_eq!(entries.len(), 3);
        assert!(entries[0].spec.is_ok());
        assert_eq!(entries[1].id, "bad");
        assert_eq!(entries[1].spec, Err(Error::UnknownFeature("depth".into())));
        assert_eq!(entries[2].id, "#2");
        assert!(entries[2].spec.is_err());
    }

    #[test]
    fn generalized_conclusion_constant() {
        let text = r#"{"specs": [{"id": "m", "kind": "implication", "premise": [], "conclusion": "logit > -1.5"}]}"#;
        match &parse_specs(text, &worked_space()).unwrap()[0].body {
            SpecBody::Implication(t) => assert_eq!(t.conclusion.to_string(), "logit > -1.5"),
            _ => panic!(),
        }
    }
}
