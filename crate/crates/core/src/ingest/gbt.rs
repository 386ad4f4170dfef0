//! Gradient-boosted tree dumps: a JSON array of nested node objects.
//!
//! Internal nodes carry `nodeid`, `split`, `split_condition`, `yes`, `no` and
//! two `children`; leaves carry `nodeid` and `leaf`. The base score is not part
//! of the dump and must be supplied by the caller.

use num_rational::BigRational;
use serde_json::{Map, Number, Value};

use super::json::{number_text, parse_json, rational_field};
use crate::model::decimal::{format_rational, parse_decimal};
use crate::model::{Binary32, Ensemble, FeatureSpace, TreeNode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GbtOptions {
    /// Accept nodes carrying a `missing` default-branch field and ignore it.
    pub allow_missing_branch: bool,
}

/// Parses with default options (missing-value branches rejected).
pub fn parse_gbt_dump(text: &str, base_score: Option<&str>, space: &FeatureSpace) -> Result<Ensemble> {
    parse_gbt_dump_with(text, base_score, space, GbtOptions::default())
}

pub fn parse_gbt_dump_with(
    text: &str,
    base_score: Option<&str>,
    space: &FeatureSpace,
    options: GbtOptions,
) -> Result<Ensemble> {
    let base_text = base_score.ok_or(Error::MissingBaseScore)?;
    let base = parse_decimal(base_text)
        .ok_or_else(|| Error::MalformedDump(format!("base score `{base_text}` is not a decimal")))?;
    let root = parse_json(text)?;
    let trees = root
        .as_array()
        .ok_or_else(|| Error::MalformedDump("expected a JSON array of trees".into()))?;
    let parsed = trees
        .iter()
        .enumerate()
        .map(|(t, tree)| {
            parse_node(tree, space, options).map_err(|e| match e {
                Error::MalformedDump(msg) => Error::MalformedDump(format!("tree {t}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(space.clone(), base, parsed)
}

fn node_id(obj: &Map<String, Value>) -> String {
    obj.get("nodeid").map(|v| v.to_string()).unwrap_or_else(|| "?".into())
}

fn parse_node(value: &Value, space: &FeatureSpace, options: GbtOptions) -> Result<TreeNode> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::MalformedDump(format!("node is not an object: {value}")))?;
    let id = node_id(obj);
    if obj.contains_key("leaf") {
        if obj.contains_key("children") {
            return Err(Error::MalformedDump(format!("leaf node {id} has children")));
        }
        return Ok(TreeNode::leaf(rational_field(obj, "leaf", &id)?));
    }
    if obj.contains_key("missing") && !options.allow_missing_branch {
        return Err(Error::UnsupportedMissingBranch { node_id: id });
    }
    let feature_name = obj
        .get("split")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::MalformedDump(format!("node {id} has neither `leaf` nor a string `split`")))?;
    let feature = space.resolve(feature_name)?;
    let condition = obj
        .get("split_condition")
        .and_then(number_text)
        .ok_or_else(|| Error::MalformedDump(format!("node {id} lacks a numeric `split_condition`")))?;
    let threshold = Binary32::parse_nearest(&condition).ok_or_else(|| Error::NonRepresentable(condition.clone()))?;
    let yes = child_ref(obj, "yes", &id)?;
    let no = child_ref(obj, "no", &id)?;
    if yes == no {
        return Err(Error::MalformedDump(format!("node {id}: `yes` and `no` name the same child")));
    }
    let children = obj
        .get("children")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedDump(format!("node {id} lacks `children`")))?;
    if children.len() != 2 {
        return Err(Error::MalformedDump(format!("node {id} has {} children, expected 2", children.len())));
    }
    let find = |target: &str| -> Result<&Value> {
        children
            .iter()
            .find(|c| c.get("nodeid").map(|n| n.to_string()).as_deref() == Some(target))
            .ok_or_else(|| Error::MalformedDump(format!("node {id}: child {target} not among children")))
    };
    let left = parse_node(find(&yes)?, space, options)?;
    let right = parse_node(find(&no)?, space, options)?;
    Ok(TreeNode::split(feature, threshold, left, right))
}

fn child_ref(obj: &Map<String, Value>, key: &str, id: &str) -> Result<String> {
    match obj.get(key) {
        Some(v @ Value::Number(_)) => Ok(v.to_string()),
        _ => Err(Error::MalformedDump(format!("node {id} lacks numeric `{key}`"))),
    }
}

/// Writes the dump format read by [`parse_gbt_dump`]. Weights whose decimal
/// expansion does not terminate are written with 40 significant digits.
pub fn to_gbt_dump(model: &Ensemble) -> String {
    let trees: Vec<Value> = model
        .trees()
        .iter()
        .map(|tree| {
            let mut next_id = 0u64;
            node_to_json(tree, model.space(), 0, &mut next_id)
        })
        .collect();
    serde_json::to_string_pretty(&Value::Array(trees)).expect("serializable")
}

fn number(text: &str) -> Value {
    Value::Number(text.parse::<Number>().expect("decimal text is a JSON number"))
}

pub(crate) fn weight_text(w: &BigRational) -> String {
    let exact = format_rational(w);
    if exact.contains('/') {
        let approx = num_traits::ToPrimitive::to_f64(w).unwrap_or(0.0);
        format!("{approx:.40e}")
    } else {
        exact
    }
}

fn node_to_json(node: &TreeNode, space: &FeatureSpace, depth: u64, next_id: &mut u64) -> Value {
    let id = *next_id;
    *next_id += 1;
    let mut obj = Map::new();
    obj.insert("nodeid".into(), Value::from(id));
    match node {
        TreeNode::Leaf { weight } => {
            obj.insert("leaf".into(), number(&weight_text(weight)));
        }
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let left_json = node_to_json(left, space, depth + 1, next_id);
            let right_json = node_to_json(right, space, depth + 1, next_id);
            obj.insert("depth".into(), Value::from(depth));
            obj.insert("split".into(), Value::from(space.feature(*feature).name.clone()));
            obj.insert("split_condition".into(), number(&format!("{:e}", threshold.get())));
            obj.insert("yes".into(), left_json["nodeid"].clone());
            obj.insert("no".into(), right_json["nodeid"].clone());
            obj.insert("children".into(), Value::Array(vec![left_json, right_json]));
        }
    }
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LogitModel, Point};
    use crate::testing::{worked_example, worked_space};

    const WORKED_DUMP: &str = r#"[
      {"nodeid": 0, "depth": 0, "split": "g", "split_condition": 2.5, "yes": 1, "no": 2, "children": [
        {"nodeid": 1, "depth": 1, "split": "p", "split_condition": 0.42, "yes": 3, "no": 4, "children": [
          {"nodeid": 3, "leaf": 0.3}, {"nodeid": 4, "leaf": 0.5}]},
        {"nodeid": 2, "depth": 1, "split": "p", "split_condition": 0.42, "yes": 5, "no": 6, "children": [
          {"nodeid": 5, "leaf": -0.1}, {"nodeid": 6, "leaf": 0.05}]}]},
      {"nodeid": 0, "depth": 0, "split": "l", "split_condition": 1.0, "yes": 1, "no": 2, "children": [
        {"nodeid": 2, "leaf": -0.3}, {"nodeid": 1, "leaf": 0.2}]}
    ]"#;

    #[test]
    fn parses_worked_example() {
        let model = parse_gbt_dump(WORKED_DUMP, Some("0"), &worked_space()).unwrap();
        assert_eq!(model.trees().len(), 2);
        assert_eq!(model.leaf_count(), 6);
        assert_eq!(model, worked_example());
    }

    #[test]
    fn base_score_is_mandatory() {
        assert_eq!(parse_gbt_dump(WORKED_DUMP, None, &worked_space()), Err(Error::MissingBaseScore));
    }

    #[test]
    fn empty_dump_is_base_score() {
        let model = parse_gbt_dump("[]", Some("0.5"), &worked_space()).unwrap();
        let p = Point::from_f32s(&[1.0, 1.0, 1.0, 0.5]).unwrap();
        assert_eq!(model.evaluate_exact(&p).unwrap(), parse_decimal("0.5").unwrap());
    }

    #[test]
    fn rejects_unknown_feature_and_structure() {
        let unknown = r#"[{"nodeid":0,"split":"depth","split_condition":1,"yes":1,"no":2,"children":[{"nodeid":1,"leaf":1},{"nodeid":2,"leaf":2}]}]"#;
        assert_eq!(parse_gbt_dump(unknown, Some("0"), &worked_space()), Err(Error::UnknownFeature("depth".into())));
        let one_child = r#"[{"nodeid":0,"split":"g","split_condition":1,"yes":1,"no":2,"children":[{"nodeid":1,"leaf":1}]}]"#;
        assert!(matches!(parse_gbt_dump(one_child, Some("0"), &worked_space()), Err(Error::MalformedDump(_))));
        let dangling = r#"[{"nodeid":0,"split":"g","split_condition":1,"yes":1,"no":7,"children":[{"nodeid":1,"leaf":1},{"nodeid":2,"leaf":2}]}]"#;
        assert!(matches!(parse_gbt_dump(dangling, Some("0"), &worked_space()), Err(Error::MalformedDump(_))));
        assert!(matches!(parse_gbt_dump("{}", Some("0"), &worked_space()), Err(Error::MalformedDump(_))));
        assert!(matches!(parse_gbt_dump("[1", Some("0"), &worked_space()), Err(Error::MalformedDump(_))));
        assert!(matches!(parse_gbt_dump("[]", Some("zero"), &worked_space()), Err(Error::MalformedDump(_))));
    }

    #[test]
    fn missing_branch_needs_opt_in() {
        let dump = r#"[{"nodeid":0,"split":"g","split_condition":1,"yes":1,"no":2,"missing":1,"children":[{"nodeid":1,"leaf":1},{"nodeid":2,"leaf":2}]}]"#;
        assert_eq!(
            parse_gbt_dump(dump, Some("0"), &worked_space()),
            Err(Error::UnsupportedMissingBranch { node_id: "0".into() })
        );
        let opts = GbtOptions { allow_missing_branch: true };
        assert_eq!(parse_gbt_dump_with(dump, Some("0"), &worked_space(), opts).unwrap().leaf_count(), 2);
    }

    #[test]
    fn thresholds_are_cast_to_binary32() {
        let dump = r#"[{"nodeid":0,"split":"p","split_condition":0.4200000000001,"yes":1,"no":2,"children":[{"nodeid":1,"leaf":1},{"nodeid":2,"leaf":2}]}]"#;
        let model = parse_gbt_dump(dump, Some("0"), &worked_space()).unwrap();
        match &model.trees()[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(threshold.get(), 0.42f32),
            _ => panic!("expected split"),
        }
    }

    #[test]
    fn leaf_weights_keep_decimal_text() {
        let dump = r#"[{"nodeid":0,"leaf":0.1234567890123456789}]"#;
        let model = parse_gbt_dump(dump, Some("0"), &worked_space()).unwrap();
        assert_eq!(
            model.trees()[0],
            TreeNode::leaf(parse_decimal("0.1234567890123456789").unwrap())
        );
    }

    #[test]
    fn serialization_round_trips() {
        let model = worked_example();
        let again = parse_gbt_dump(&to_gbt_dump(&model), Some("0"), &worked_space()).unwrap();
        assert_eq!(again, model);
    }
}
