use std::ops::{AddAssign, SubAssign};
use std::time::Instant;

use num_bigint::BigInt;

use super::compiled::{fits_i128, scale_and_magnitude, Compiled, Score};
use super::search::{Goal, Instance, Problem};
use super::witness::midpoint_of;
use super::{Counterexample, Limits, SearchStats, Status, Verdict};
use crate::model::{Ensemble, KeyRange, LogitModel, Point};
use crate::spec::Direction;
use crate::{Error, Result};

/// Leaf pairs of one tree that break monotonicity, as indices into
/// [`TreeNode::leaf_boxes`](crate::model::TreeNode::leaf_boxes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDefect {
    pub tree: usize,
    /// At most [`TreeDefect::MAX_LISTED`] pairs `(a, b)`: some point of `a`
    /// lies at or below some point of `b` in the feature, the boxes share
    /// every other coordinate, and the weights are out of order.
    pub leaf_pairs: Vec<(usize, usize)>,
    pub total_pairs: usize,
}

impl TreeDefect {
    pub const MAX_LISTED: usize = 16;
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerTreeResult {
    pub verdict: Verdict,
    pub dirty_trees: Vec<TreeDefect>,
}

fn out_of_order<T: PartialOrd>(direction: Direction, low: &T, high: &T) -> bool {
    match direction {
        Direction::NonDecreasing => low > high,
        Direction::NonIncreasing => low < high,
    }
}

fn check_feature(model: &Ensemble, feature: usize) -> Result<()> {
    if feature >= model.space().len() {
        return Err(Error::UnknownFeature(format!("#{feature}")));
    }
    Ok(())
}

/// Sufficient check: proves monotonicity when every tree is monotone on its
/// own. A dirty tree gives `Inconclusive`, never `Violated`.
pub fn check_monotone_per_tree(model: &Ensemble, feature: usize, direction: Direction) -> Result<PerTreeResult> {
    check_feature(model, feature)?;
    let start = Instant::now();
    let mut pairs_examined = 0u64;
    let mut dirty_trees = Vec::new();
    for (t, tree) in model.trees().iter().enumerate() {
        if !tree.uses_feature(feature) {
            continue;
        }
        let boxes = tree.leaf_boxes(model.space());
        // weights replaced by their rank so the pair loop compares integers
        let mut by_weight: Vec<usize> = (0..boxes.len()).collect();
        by_weight.sort_by(|&a, &b| boxes[a].1.cmp(&boxes[b].1));
        let mut rank = vec![0usize; boxes.len()];
        for (k, &i) in by_weight.iter().enumerate() {
            let tied = k > 0 && boxes[by_weight[k - 1]].1 == boxes[i].1;
            rank[i] = if tied { rank[by_weight[k - 1]] } else { k };
        }
        let leaves: Vec<(usize, Vec<KeyRange>, usize)> = boxes
            .iter()
            .enumerate()
            .filter_map(|(i, (bx, _))| bx.key_ranges().map(|r| (i, r, rank[i])))
            .collect();
        let mut defect = TreeDefect {
            tree: t,
            leaf_pairs: Vec::new(),
            total_pairs: 0,
        };
        for (ia, a, wa) in &leaves {
            for (ib, b, wb) in &leaves {
                pairs_examined += 1;
                if a[feature].lo > b[feature].hi || !out_of_order(direction, wa, wb) {
                    continue;
                }
                let shared = (0..a.len()).all(|f| f == feature || a[f].intersect(&b[f]).is_some());
                if shared {
                    defect.total_pairs += 1;
                    if defect.leaf_pairs.len() < TreeDefect::MAX_LISTED {
                        defect.leaf_pairs.push((*ia, *ib));
                    }
                }
            }
        }
        if defect.total_pairs > 0 {
            dirty_trees.push(defect);
        }
    }
    let stats = SearchStats {
        nodes_explored: pairs_examined,
        max_depth: 0,
        elapsed: start.elapsed(),
        notes: Vec::new(),
    };
    let status = if dirty_trees.is_empty() { Status::Proven } else { Status::Inconclusive };
    Ok(PerTreeResult {
        verdict: Verdict {
            status,
            witness: None,
            stats,
        },
        dirty_trees,
    })
}

/// Complete two-point check: searches for `x <= x'` in the feature, equal
/// elsewhere, with the logit moving against `direction`.
pub fn check_monotone_direct(
    model: &Ensemble,
    feature: usize,
    direction: Direction,
    limits: &Limits,
) -> Result<Verdict> {
    check_feature(model, feature)?;
    let start = Instant::now();
    let d = model.space().len();
    let mut root = model.space().domain_ranges();
    root.push(root[feature]);
    let (scale, magnitude) = scale_and_magnitude(model, &[], 2);
    let mut stats = SearchStats::default();
    let found = if fits_i128(&magnitude) {
        run::<i128>(model, feature, direction, root, &scale, limits, start, &mut stats)?
    } else {
        run::<BigInt>(model, feature, direction, root, &scale, limits, start, &mut stats)?
    };
    stats.elapsed = start.elapsed();
    let Some(cell) = found else {
        return Ok(Verdict::proven(stats));
    };

    let shared: Vec<_> = cell[..d].iter().map(|r| midpoint_of(*r)).collect();
    let mut first = shared.clone();
    let mut second = shared;
    second[feature] = midpoint_of(cell[d]);
    first[feature] = midpoint_of(cell[feature]);
    if first[feature] > second[feature] {
        std::mem::swap(&mut first, &mut second);
    }
    let (low, high) = (Point::new(first), Point::new(second));
    let (low_logit, high_logit) = (model.evaluate_exact(&low)?, model.evaluate_exact(&high)?);
    let differs_elsewhere = (0..d).any(|f| f != feature && low[f] != high[f]);
    if differs_elsewhere || !out_of_order(direction, &low_logit, &high_logit) {
        return Err(Error::Internal("monotonicity witness failed re-validation".into()));
    }
    Ok(Verdict {
        status: Status::Violated,
        witness: Some(Counterexample {
            points: vec![low, high],
            logits: vec![low_logit, high_logit],
        }),
        stats,
    })
}

#[allow(clippy::too_many_arguments)]
fn run<S: Score>(
    model: &Ensemble,
    feature: usize,
    direction: Direction,
    root: Vec<KeyRange>,
    scale: &BigInt,
    limits: &Limits,
    start: Instant,
    stats: &mut SearchStats,
) -> Result<Option<Vec<KeyRange>>>
where
    S: for<'a> AddAssign<&'a S> + for<'a> SubAssign<&'a S>,
{
    let d = root.len() - 1;
    let compiled = Compiled::<S>::new(model, &root[..d], scale)
        .ok_or_else(|| Error::Internal("scaled value exceeds the integer type".into()))?;
    // f(x with slot `feature`) - f(x with slot d); trees not reading the
    // feature cancel.
    let mut instances = Vec::new();
    for (t, tree) in compiled.trees.iter().enumerate() {
        if tree.uses.binary_search(&(feature as u32)).is_ok() {
            instances.push(Instance {
                tree: t as u32,
                negate: false,
                remap: None,
            });
            instances.push(Instance {
                tree: t as u32,
                negate: true,
                remap: Some((feature as u32, d as u32)),
            });
        }
    }
    // The first copy must sit below the second for a non-decreasing
    // violation and above it for a non-increasing one.
    let ordering = match direction {
        Direction::NonDecreasing => (feature, d),
        Direction::NonIncreasing => (d, feature),
    };
    let problem = Problem {
        trees: &compiled.trees,
        instances,
        constant: S::zero(),
        goal: Goal::Above,
        c: S::zero(),
        ordering: Some(ordering),
    };
    let outcome = problem.run(root, limits, start)?;
    stats.nodes_explored = outcome.nodes;
    stats.max_depth = outcome.max_depth;
    Ok(outcome.violation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use crate::model::decimal::parse_decimal;
    use crate::model::{Binary32, TreeNode};
    use crate::testing::{worked_example, worked_space};

    fn leaf(w: &str) -> TreeNode {
        TreeNode::leaf(parse_decimal(w).unwrap())
    }

    fn step(feature: usize, at: f32, below: &str, above: &str) -> TreeNode {
        TreeNode::split(feature, Binary32::new(at).unwrap(), leaf(below), leaf(above))
    }

    fn sum_of_steps() -> Ensemble {
        Ensemble::new(worked_space(), BigRational::from_integer(0.into()), vec![step(3, 0.4, "1", "0"), step(3, 0.4, "0", "2")]).unwrap()
    }

    #[test]
    fn constant_trees_are_monotone() {
        let m = Ensemble::new(worked_space(), BigRational::from_integer(0.into()), vec![leaf("1"), leaf("-2")]).unwrap();
        for dir in [Direction::NonDecreasing, Direction::NonIncreasing] {
            assert_eq!(check_monotone_per_tree(&m, 3, dir).unwrap().verdict.status, Status::Proven);
            assert!(check_monotone_direct(&m, 3, dir, &Limits::default()).unwrap().is_proven());
        }
    }

    #[test]
    fn worked_example_increasing_in_p() {
        let m = worked_example();
        let per_tree = check_monotone_per_tree(&m, 3, Direction::NonDecreasing).unwrap();
        assert_eq!(per_tree.verdict.status, Status::Proven);
        assert!(check_monotone_direct(&m, 3, Direction::NonDecreasing, &Limits::default()).unwrap().is_proven());
        let v = check_monotone_direct(&m, 3, Direction::NonIncreasing, &Limits::deterministic()).unwrap();
        assert_eq!(v.status, Status::Violated);
        let w = v.witness.unwrap();
        assert!(w.points[0][3] < w.points[1][3]);
        assert!(w.logits[0] < w.logits[1]);
    }

    #[test]
    fn sum_of_steps_needs_the_direct_check() {
        let m = sum_of_steps();
        let per_tree = check_monotone_per_tree(&m, 3, Direction::NonDecreasing).unwrap();
        assert_eq!(per_tree.verdict.status, Status::Inconclusive);
        assert_eq!(per_tree.dirty_trees.len(), 1);
        assert_eq!(per_tree.dirty_trees[0].tree, 0);
        assert_eq!(per_tree.dirty_trees[0].leaf_pairs, vec![(0, 1)]);
        assert!(check_monotone_direct(&m, 3, Direction::NonDecreasing, &Limits::default()).unwrap().is_proven());
        let v = check_monotone_direct(&m, 3, Direction::NonIncreasing, &Limits::default()).unwrap();
        assert_eq!(v.status, Status::Violated);
    }

    #[test]
    fn decrease_across_a_step_is_found() {
        let m = Ensemble::new(worked_space(), BigRational::from_integer(0.into()), vec![step(3, 0.4, "1", "0")]).unwrap();
        let v = check_monotone_direct(&m, 3, Direction::NonDecreasing, &Limits::deterministic()).unwrap();
        let w = v.witness.unwrap();
        assert!(w.points[0][3] < Binary32::new(0.4).unwrap());
        assert!(w.points[1][3] >= Binary32::new(0.4).unwrap());
        assert_eq!(w.logits, vec![BigRational::from_integer(1.into()), BigRational::from_integer(0.into())]);
    }

    #[test]
    fn unknown_feature() {
        assert!(check_monotone_per_tree(&worked_example(), 9, Direction::NonDecreasing).is_err());
    }
}
