//! Integer-scaled, domain-pruned flat trees used by the search.

use std::fmt::Debug;
use std::ops::{AddAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::model::binary32::scaled_integer;
use crate::model::{Ensemble, KeyRange, TreeNode};

/// Exact integer arithmetic for scaled logits.
pub(crate) trait Score:
    Clone + Ord + Debug + Send + Sync + Zero + Sub<Output = Self> + Neg<Output = Self> + 'static
where
    Self: for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self>,
{
    fn from_big(value: &BigInt) -> Option<Self>;
}

impl Score for i128 {
    fn from_big(value: &BigInt) -> Option<Self> {
        value.to_i128()
    }
}

impl Score for BigInt {
    fn from_big(value: &BigInt) -> Option<Self> {
        Some(value.clone())
    }
}

/// Smallest positive integer turning every value into an integer.
pub(crate) fn common_scale<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scale for `model` and extra constants, plus an upper bound on the
/// absolute scaled value of any partial sum (`copies` evaluations of the
/// model combined with the constants).
pub(crate) fn scale_and_magnitude(model: &Ensemble, extra: &[&BigRational], copies: u32) -> (BigInt, BigInt) {
    let mut leaves = Vec::new();
    for tree in model.trees() {
        collect_weights(tree, &mut leaves);
    }
    let scale = common_scale(leaves.iter().copied().chain(extra.iter().copied()).chain([model.base_score()]));
    let scaled_abs = |v: &BigRational| scaled_integer(v, &scale).expect("scale clears denominators").abs();
    let mut per_copy = scaled_abs(model.base_score());
    for tree in model.trees() {
        let mut ws = Vec::new();
        collect_weights(tree, &mut ws);
        per_copy += ws.into_iter().map(scaled_abs).max().unwrap_or_default();
    }
    let mut magnitude = per_copy * BigInt::from(copies);
    for v in extra {
        magnitude += scaled_abs(v);
    }
    (scale, magnitude)
}

fn collect_weights<'a>(node: &'a TreeNode, out: &mut Vec<&'a BigRational>) {
    match node {
        TreeNode::Leaf { weight } => out.push(weight),
        TreeNode::Split { left, right, .. } => {
            collect_weights(left, out);
            collect_weights(right, out);
        }
    }
}

/// True when every intermediate sum fits comfortably in an `i128`.
pub(crate) fn fits_i128(magnitude: &BigInt) -> bool {
    magnitude.bits() < 120
}

#[derive(Debug, Clone)]
pub(crate) enum FlatNode<S> {
    Leaf(S),
    Split {
        feature: u32,
        key: i32,
        left: u32,
        right: u32,
        /// Extremes over the leaves of this subtree.
        min: S,
        max: S,
        /// Region of this node on each feature its subtree splits on.
        region: (u32, u32),
    },
}

/// A tree restricted to a root box: every split strictly divides the
/// region reaching it, so every leaf is reachable from some binary32 point
/// of the root box. Node 0 is the root.
#[derive(Debug, Clone)]
pub(crate) struct FlatTree<S> {
    pub nodes: Vec<FlatNode<S>>,
    pub regions: Vec<(u32, KeyRange)>,
    pub uses: Vec<u32>,
}

impl<S: Score> FlatTree<S>
where
    S: for<'a> AddAssign<&'a S> + for<'a> SubAssign<&'a S>,
{
    fn build(tree: &TreeNode, root: &[KeyRange], scale: &BigInt) -> Option<Self> {
        let mut flat = FlatTree {
            nodes: Vec::new(),
            regions: Vec::new(),
            uses: Vec::new(),
        };
        let mut region = root.to_vec();
        let (_, _, _, uses) = flat.add(tree, &mut region, scale)?;
        flat.uses = uses;
        Some(flat)
    }

    /// Returns (index, min, max, features used).
    fn add(&mut self, node: &TreeNode, region: &mut [KeyRange], scale: &BigInt) -> Option<(u32, S, S, Vec<u32>)> {
        match node {
            TreeNode::Leaf { weight } => {
                let w = S::from_big(&scaled_integer(weight, scale)?)?;
                let index = self.nodes.len() as u32;
                self.nodes.push(FlatNode::Leaf(w.clone()));
                Some((index, w.clone(), w, Vec::new()))
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let key = threshold.key();
                let range = region[*feature];
                if range.hi < key {
                    return self.add(left, region, scale);
                }
                if range.lo >= key {
                    return self.add(right, region, scale);
                }
                let index = self.nodes.len() as u32;
                self.nodes.push(FlatNode::Leaf(S::zero()));
                region[*feature] = KeyRange { lo: range.lo, hi: key - 1 };
                let (l, l_min, l_max, l_uses) = self.add(left, region, scale)?;
                region[*feature] = KeyRange { lo: key, hi: range.hi };
                let (r, r_min, r_max, r_uses) = self.add(right, region, scale)?;
                region[*feature] = range;

                let mut uses = l_uses;
                uses.extend(r_uses);
                uses.push(*feature as u32);
                uses.sort_unstable();
                uses.dedup();
                let start = self.regions.len() as u32;
                self.regions.extend(uses.iter().map(|&f| (f, region[f as usize])));
                let end = self.regions.len() as u32;
                let min = l_min.min(r_min);
                let max = l_max.max(r_max);
                self.nodes[index as usize] = FlatNode::Split {
                    feature: *feature as u32,
                    key,
                    left: l,
                    right: r,
                    min: min.clone(),
                    max: max.clone(),
                    region: (start, end),
                };
                Some((index, min, max, uses))
            }
        }
    }

    pub fn region(&self, span: (u32, u32)) -> &[(u32, KeyRange)] {
        &self.regions[span.0 as usize..span.1 as usize]
    }

    /// Path-following evaluation on binary32 keys.
    pub fn evaluate(&self, keys: &[i32]) -> &S {
        let mut node = 0u32;
        loop {
            match &self.nodes[node as usize] {
                FlatNode::Leaf(w) => return w,
                FlatNode::Split {
                    feature, key, left, right, ..
                } => node = if keys[*feature as usize] < *key { *left } else { *right },
            }
        }
    }
}

/// An ensemble pruned to a root box with integer leaf values.
#[derive(Debug, Clone)]
pub(crate) struct Compiled<S> {
    pub trees: Vec<FlatTree<S>>,
    pub base: S,
    pub scale: BigInt,
}

impl<S: Score> Compiled<S>
where
    S: for<'a> AddAssign<&'a S> + for<'a> SubAssign<&'a S>,
{
    /// `None` if some scaled value does not fit `S`.
    pub fn new(model: &Ensemble, root: &[KeyRange], scale: &BigInt) -> Option<Self> {
        let trees = model
            .trees()
            .iter()
            .map(|t| FlatTree::build(t, root, scale))
            .collect::<Option<Vec<_>>>()?;
        let base = S::from_big(&scaled_integer(model.base_score(), scale)?)?;
        Some(Compiled {
            trees,
            base,
            scale: scale.clone(),
        })
    }

    pub fn scaled(&self, value: &BigRational) -> Option<S> {
        S::from_big(&scaled_integer(value, &self.scale)?)
    }

    /// Scaled logit at a point of the root box.
    pub fn evaluate(&self, keys: &[i32]) -> S {
        let mut sum = self.base.clone();
        for tree in &self.trees {
            sum += tree.evaluate(keys);
        }
        sum
    }
}
