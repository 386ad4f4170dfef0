//! Depth-first branch-and-bound over boxes of binary32 key ranges.

use std::collections::VecDeque;
use std::ops::{AddAssign, SubAssign};
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::compiled::{FlatNode, FlatTree, Score};
use super::Limits;
use crate::model::KeyRange;
use crate::{Error, Result};

/// One signed copy of a tree. `remap` redirects one feature to another
/// slot of the search box (the second copy of the monotone feature).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Instance {
    pub tree: u32,
    pub negate: bool,
    pub remap: Option<(u32, u32)>,
}

impl Instance {
    #[inline]
    fn slot(&self, feature: u32) -> usize {
        match self.remap {
            Some((from, to)) if from == feature => to as usize,
            _ => feature as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    /// Find a point with `sum > c`.
    Above,
    /// Find a point with `sum <= c`.
    AtMost,
}

/// `exists x in root: constant + sum of instances (goal) c`, optionally
/// requiring `x[low] <= x[high]`.
pub(crate) struct Problem<'a, S> {
    pub trees: &'a [FlatTree<S>],
    pub instances: Vec<Instance>,
    pub constant: S,
    pub goal: Goal,
    pub c: S,
    pub ordering: Option<(usize, usize)>,
}

#[derive(Debug, Default)]
pub(crate) struct Outcome {
    pub violation: Option<Vec<KeyRange>>,
    pub nodes: u64,
    pub max_depth: u32,
}

struct Cell<S> {
    ranges: Vec<KeyRange>,
    active: Vec<(u32, u32)>,
    fixed: S,
    depth: u32,
}

enum Step<S> {
    Prune,
    Violation(Vec<KeyRange>),
    Branch(Cell<S>, Cell<S>),
}

struct Shared<'l> {
    limits: &'l Limits,
    start: Instant,
    nodes: AtomicU64,
    max_depth: AtomicU32,
    stop: AtomicBool,
}

impl Shared<'_> {
    fn tick(&self, depth: u32) -> Result<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        self.max_depth.fetch_max(depth, Ordering::Relaxed);
        if n > self.limits.max_nodes {
            return Err(self.exhausted(format!("node limit {} reached", self.limits.max_nodes)));
        }
        if n % 256 == 0 && self.start.elapsed() > self.limits.timeout {
            return Err(self.exhausted(format!("timeout of {:?} reached", self.limits.timeout)));
        }
        Ok(())
    }

    fn exhausted(&self, reason: String) -> Error {
        self.stop.store(true, Ordering::Relaxed);
        Error::ResourceExhausted {
            reason,
            nodes: self.nodes.load(Ordering::Relaxed),
            elapsed: self.start.elapsed(),
        }
    }
}

impl<S: Score> Problem<'_, S>
where
    S: for<'a> AddAssign<&'a S> + for<'a> SubAssign<&'a S>,
{
    pub fn run(&self, root: Vec<KeyRange>, limits: &Limits, start: Instant) -> Result<Outcome> {
        let shared = Shared {
            limits,
            start,
            nodes: AtomicU64::new(0),
            max_depth: AtomicU32::new(0),
            stop: AtomicBool::new(false),
        };
        let cell = Cell {
            ranges: root,
            active: (0..self.instances.len() as u32).map(|i| (i, 0)).collect(),
            fixed: self.constant.clone(),
            depth: 0,
        };
        let violation = if limits.deterministic {
            self.depth_first(vec![cell], &shared)?
        } else {
            self.parallel(cell, &shared)?
        };
        Ok(Outcome {
            violation,
            nodes: shared.nodes.load(Ordering::Relaxed),
            max_depth: shared.max_depth.load(Ordering::Relaxed),
        })
    }

    fn depth_first(&self, mut stack: Vec<Cell<S>>, shared: &Shared) -> Result<Option<Vec<KeyRange>>> {
        let mut candidates = Vec::new();
        while let Some(cell) = stack.pop() {
            if shared.stop.load(Ordering::Relaxed) {
                return Ok(None);
            }
            shared.tick(cell.depth)?;
            match self.step(cell, &mut candidates)? {
                Step::Prune => {}
                Step::Violation(ranges) => {
                    shared.stop.store(true, Ordering::Relaxed);
                    return Ok(Some(ranges));
                }
                Step::Branch(left, right) => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        Ok(None)
    }

    fn parallel(&self, root: Cell<S>, shared: &Shared) -> Result<Option<Vec<KeyRange>>> {
        let target = rayon::current_num_threads() * 16;
        let mut frontier = VecDeque::from([root]);
        let mut candidates = Vec::new();
        while !frontier.is_empty() && frontier.len() < target {
            let cell = frontier.pop_front().expect("non-empty");
            shared.tick(cell.depth)?;
            match self.step(cell, &mut candidates)? {
                Step::Prune => {}
                Step::Violation(ranges) => return Ok(Some(ranges)),
                Step::Branch(left, right) => {
                    frontier.push_back(left);
                    frontier.push_back(right);
                }
            }
        }
        let found = frontier
            .into_par_iter()
            .map(|cell| self.depth_first(vec![cell], shared))
            .find_map_any(|r| match r {
                Ok(None) => None,
                other => Some(other),
            });
        found.transpose().map(Option::flatten)
    }

    fn step(&self, mut cell: Cell<S>, candidates: &mut Vec<(u32, i32)>) -> Result<Step<S>> {
        if let Some((low, high)) = self.ordering {
            let (a, b) = (cell.ranges[low], cell.ranges[high]);
            if a.lo > b.hi {
                return Ok(Step::Prune);
            }
            cell.ranges[low].hi = a.hi.min(b.hi);
            cell.ranges[high].lo = b.lo.max(a.lo);
        }

        // Descend each tree as far as the whole box agrees; settled trees
        // move into the fixed sum.
        let mut i = 0;
        'trees: while i < cell.active.len() {
            let (inst, mut node) = cell.active[i];
            let instance = &self.instances[inst as usize];
            let tree = &self.trees[instance.tree as usize];
            loop {
                match &tree.nodes[node as usize] {
                    FlatNode::Leaf(w) => {
                        if instance.negate {
                            cell.fixed -= w;
                        } else {
                            cell.fixed += w;
                        }
                        cell.active.swap_remove(i);
                        continue 'trees;
                    }
                    FlatNode::Split {
                        feature, key, left, right, ..
                    } => {
                        let r = cell.ranges[instance.slot(*feature)];
                        if r.hi < *key {
                            node = *left;
                        } else if r.lo >= *key {
                            node = *right;
                        } else {
                            break;
                        }
                    }
                }
            }
            cell.active[i].1 = node;
            i += 1;
        }

        candidates.clear();
        let mut lo = cell.fixed.clone();
        let mut hi = cell.fixed.clone();
        for &(inst, node) in &cell.active {
            let instance = &self.instances[inst as usize];
            let tree = &self.trees[instance.tree as usize];
            let (min, max) = reach(tree, node, instance, &cell.ranges, candidates);
            if instance.negate {
                lo -= max;
                hi -= min;
            } else {
                lo += min;
                hi += max;
            }
        }

        let (excluded, forced) = match self.goal {
            Goal::Above => (hi <= self.c, lo > self.c),
            Goal::AtMost => (lo > self.c, hi <= self.c),
        };
        if excluded {
            return Ok(Step::Prune);
        }
        if forced {
            return Ok(Step::Violation(cell.ranges));
        }
        let (slot, key) = choose_branch(candidates)
            .ok_or_else(|| Error::Internal("undecided box with no straddling threshold".into()))?;
        let slot = slot as usize;
        let mut right = Cell {
            ranges: cell.ranges.clone(),
            active: cell.active.clone(),
            fixed: cell.fixed.clone(),
            depth: cell.depth + 1,
        };
        right.ranges[slot].lo = key;
        let mut left = cell;
        left.ranges[slot].hi = key - 1;
        left.depth += 1;
        Ok(Step::Branch(left, right))
    }
}

/// Extremes of the leaves reachable from `ranges`, recording every
/// straddled split. Subtrees whose region lies inside the box report their
/// precomputed extremes and contribute only their root as a candidate.
fn reach<'t, S: Score>(
    tree: &'t FlatTree<S>,
    node: u32,
    instance: &Instance,
    ranges: &[KeyRange],
    candidates: &mut Vec<(u32, i32)>,
) -> (&'t S, &'t S)
where
    S: for<'a> AddAssign<&'a S> + for<'a> SubAssign<&'a S>,
{
    match &tree.nodes[node as usize] {
        FlatNode::Leaf(w) => (w, w),
        FlatNode::Split {
            feature,
            key,
            left,
            right,
            min,
            max,
            region,
        } => {
            let slot = instance.slot(*feature);
            let r = ranges[slot];
            if r.hi < *key {
                return reach(tree, *left, instance, ranges, candidates);
            }
            if r.lo >= *key {
                return reach(tree, *right, instance, ranges, candidates);
            }
            candidates.push((slot as u32, *key));
            let covered = tree.region(*region).iter().all(|(f, span)| {
                let r = ranges[instance.slot(*f)];
                r.lo <= span.lo && span.hi <= r.hi
            });
            if covered {
                return (min, max);
            }
            let (a, b) = reach(tree, *left, instance, ranges, candidates);
            let (c, d) = reach(tree, *right, instance, ranges, candidates);
            (a.min(c), b.max(d))
        }
    }
}

/// The (slot, threshold) straddling the most ambiguous nodes; ties go to
/// the lowest slot, then the median of that slot's tied thresholds.
fn choose_branch(candidates: &mut [(u32, i32)]) -> Option<(u32, i32)> {
    candidates.sort_unstable();
    let mut runs: Vec<((u32, i32), usize)> = Vec::new();
    for &c in candidates.iter() {
        match runs.last_mut() {
            Some((last, n)) if *last == c => *n += 1,
            _ => runs.push((c, 1)),
        }
    }
    let best = runs.iter().map(|r| r.1).max()?;
    let slot = runs.iter().filter(|r| r.1 == best).map(|r| r.0 .0).min()?;
    let tied: Vec<i32> = runs.iter().filter(|r| r.1 == best && r.0 .0 == slot).map(|r| r.0 .1).collect();
    Some((slot, tied[(tied.len() - 1) / 2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_choice_prefers_frequency_then_slot_then_median() {
        let mut c = vec![(3, 10), (1, 5), (3, 10), (1, 7)];
        assert_eq!(choose_branch(&mut c), Some((3, 10)));
        let mut c = vec![(3, 10), (1, 5), (1, 7), (1, 9)];
        assert_eq!(choose_branch(&mut c), Some((1, 7)));
        let mut c = vec![(2, 4), (2, 8)];
        assert_eq!(choose_branch(&mut c), Some((2, 4)));
        assert_eq!(choose_branch(&mut []), None);
    }
}
