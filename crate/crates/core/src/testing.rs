//! Small hand-built models shared by tests, docs and the CLI smoke fixtures.

use num_rational::BigRational;

use crate::model::decimal::parse_decimal;
use crate::model::{Binary32, Ensemble, FeatureSpace, TreeNode};

fn dec(s: &str) -> BigRational {
    parse_decimal(s).expect("literal")
}

/// Groundwater depth `g`, distance `l`, slope `s`, PGA `p` over
/// `[0.37, 6.05] x [0, 3.29] x [0, 10.5] x [0.33, 0.57]`.
pub fn worked_space() -> FeatureSpace {
    let bounds = [
        ("g", dec("0.37"), dec("6.05")),
        ("l", dec("0"), dec("3.29")),
        ("s", dec("0"), dec("10.5")),
        ("p", dec("0.33"), dec("0.57")),
    ];
    let refs: Vec<(&str, &BigRational, &BigRational)> = bounds.iter().map(|(n, l, u)| (*n, l, u)).collect();
    FeatureSpace::from_decimal_bounds(&refs).expect("valid bounds")
}

fn split(feature: usize, threshold: &str, left: TreeNode, right: TreeNode) -> TreeNode {
    let t = Binary32::parse_nearest(threshold).expect("literal");
    TreeNode::split(feature, t, left, right)
}

fn leaf(w: &str) -> TreeNode {
    TreeNode::leaf(dec(w))
}

/// Two-tree ensemble: the first tree splits on `g` at 2.5 then `p` at 0.42,
/// the second on `l` at 1.0; base score 0.
pub fn worked_example() -> Ensemble {
    worked_example_with_right_branch("-0.1", "0.05")
}

/// Same shape with the `g >= 2.5` leaves of the first tree replaced.
pub fn worked_example_with_right_branch(low_p: &str, high_p: &str) -> Ensemble {
    let h1 = split(
        0,
        "2.5",
        split(3, "0.42", leaf("0.3"), leaf("0.5")),
        split(3, "0.42", leaf(low_p), leaf(high_p)),
    );
    let h2 = split(1, "1.0", leaf("0.2"), leaf("-0.3"));
    Ensemble::new(worked_space(), dec("0"), vec![h1, h2]).expect("valid ensemble")
}
