use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use super::binary32::Binary32;
use super::space::{FeatureSpace, InputBox, Interval, Point};
use crate::{Error, Result};

/// A binary split tree. `Split` sends a point left iff `x[feature] < threshold`.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        weight: BigRational,
    },
    Split {
        feature: usize,
        threshold: Binary32,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf(weight: BigRational) -> Self {
        TreeNode::Leaf { weight }
    }

    pub fn split(feature: usize, threshold: Binary32, left: TreeNode, right: TreeNode) -> Self {
        TreeNode::Split {
            feature,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Follows the split path of `coords` to a leaf weight.
    pub fn leaf_weight(&self, coords: &[Binary32]) -> &BigRational {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if coords[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { feature, left, right, .. } => {
                Some(*feature).max(left.max_feature()).max(right.max_feature())
            }
        }
    }

    pub fn uses_feature(&self, index: usize) -> bool {
        match self {
            TreeNode::Leaf { .. } => false,
            TreeNode::Split { feature, left, right, .. } => {
                *feature == index || left.uses_feature(index) || right.uses_feature(index)
            }
        }
    }

    /// Min and max leaf weight reachable from some point of `bx`.
    pub fn bound_over_box(&self, bx: &InputBox) -> (BigRational, BigRational) {
        match self {
            TreeNode::Leaf { weight } => (weight.clone(), weight.clone()),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let interval = &bx.intervals[*feature];
                let go_left = interval.reaches_below(*threshold);
                let go_right = interval.reaches_at_or_above(*threshold);
                match (go_left, go_right) {
                    (true, false) => left.bound_over_box(bx),
                    (false, true) => right.bound_over_box(bx),
                    _ => {
                        let (l_lo, l_hi) = left.bound_over_box(bx);
                        let (r_lo, r_hi) = right.bound_over_box(bx);
                        (l_lo.min(r_lo), l_hi.max(r_hi))
                    }
                }
            }
        }
    }

    /// Partitions the domain of `space` into leaf regions. The left child of
    /// a split at `t` receives `[lo, t)`, the right child `[t, hi]`; regions
    /// empty over the reals are omitted.
    pub fn leaf_boxes(&self, space: &FeatureSpace) -> Vec<(InputBox, BigRational)> {
        let mut out = Vec::new();
        collect_leaf_boxes(self, space.domain_box(), &mut out);
        out
    }
}

fn collect_leaf_boxes(node: &TreeNode, bx: InputBox, out: &mut Vec<(InputBox, BigRational)>) {
    match node {
        TreeNode::Leaf { weight } => out.push((bx, weight.clone())),
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let interval = bx.intervals[*feature];
            if let Some(lower) = interval.below(*threshold) {
                let mut child = bx.clone();
                child.intervals[*feature] = lower;
                collect_leaf_boxes(left, child, out);
            }
            if let Some(upper) = interval.at_least(*threshold) {
                let mut child = bx;
                child.intervals[*feature] = upper;
                collect_leaf_boxes(right, child, out);
            }
        }
    }
}

/// Predicted label; positive iff the logit is strictly greater than zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Positive,
    Negative,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Positive => "positive",
            Class::Negative => "negative",
        })
    }
}

pub fn predicted_class(logit: &BigRational) -> Class {
    if *logit > BigRational::zero() {
        Class::Positive
    } else {
        Class::Negative
    }
}

/// Anything with a feature space and an exact logit.
pub trait LogitModel {
    fn space(&self) -> &FeatureSpace;
    fn evaluate_exact(&self, point: &Point) -> Result<BigRational>;
}

/// `base_score + sum of tree outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    space: FeatureSpace,
    base_score: BigRational,
    trees: Vec<TreeNode>,
}

impl Ensemble {
    pub fn new(space: FeatureSpace, base_score: BigRational, trees: Vec<TreeNode>) -> Result<Self> {
        for (t, tree) in trees.iter().enumerate() {
            if let Some(max) = tree.max_feature() {
                if max >= space.len() {
                    return Err(Error::InvalidModel(format!(
                        "tree {t} splits on feature index {max}, space has {} features",
                        space.len()
                    )));
                }
            }
        }
        Ok(Ensemble {
            space,
            base_score,
            trees,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn base_score(&self) -> &BigRational {
        &self.base_score
    }

    pub fn trees(&self) -> &[TreeNode] {
        &self.trees
    }

    pub fn leaf_count(&self) -> usize {
        self.trees.iter().map(TreeNode::leaf_count).sum()
    }

    /// Replaces the trees, keeping space and base score.
    pub fn with_trees(&self, trees: Vec<TreeNode>) -> Result<Self> {
        Ensemble::new(self.space.clone(), self.base_score.clone(), trees)
    }

    /// Sum of the tree outputs plus base score, with no domain check.
    pub(crate) fn logit_unchecked(&self, coords: &[Binary32]) -> BigRational {
        self.trees
            .iter()
            .fold(self.base_score.clone(), |acc, tree| acc + tree.leaf_weight(coords))
    }

    /// Sound enclosure of the logit over every point of `bx`.
    pub fn bound_over_box(&self, bx: &InputBox) -> Result<(BigRational, BigRational)> {
        bx.check_within(&self.space)?;
        let mut lo = self.base_score.clone();
        let mut hi = self.base_score.clone();
        for tree in &self.trees {
            let (l, h) = tree.bound_over_box(bx);
            lo += l;
            hi += h;
        }
        Ok((lo, hi))
    }

    /// Interval restricted to the domain of feature `index`.
    pub fn domain_interval(&self, index: usize) -> Interval {
        self.space.domain_box().intervals[index]
    }
}

impl LogitModel for Ensemble {
    fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn evaluate_exact(&self, point: &Point) -> Result<BigRational> {
        self.space.check_point(point)?;
        Ok(self.logit_unchecked(point.coords()))
    }
}
