use num_rational::BigRational;

use super::binary32::Binary32;
use super::space::{FeatureSpace, Point};
use super::tree::{Ensemble, LogitModel, TreeNode};
use crate::{Error, Result};

/// Piecewise-constant shape function of one feature. `scores[i]` applies to
/// bin `i`; a value equal to an edge belongs to the bin above it.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateTerm {
    pub feature: usize,
    pub edges: Vec<Binary32>,
    pub scores: Vec<BigRational>,
}

/// Piecewise-constant interaction of two features; `scores[i][k]` is the
/// score of bin `i` on the first axis and bin `k` on the second.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTerm {
    pub features: (usize, usize),
    pub edges: (Vec<Binary32>, Vec<Binary32>),
    pub scores: Vec<Vec<BigRational>>,
}

/// Intercept plus univariate and pairwise lookup tables.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveModel {
    space: FeatureSpace,
    intercept: BigRational,
    univariate: Vec<UnivariateTerm>,
    pairwise: Vec<PairwiseTerm>,
}

fn bin_index(edges: &[Binary32], x: Binary32) -> usize {
    edges.partition_point(|e| *e <= x)
}

fn check_edges(edges: &[Binary32], term: &str) -> Result<()> {
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonAscendingEdges(term.to_string()));
    }
    Ok(())
}

impl AdditiveModel {
    pub fn new(
        space: FeatureSpace,
        intercept: BigRational,
        univariate: Vec<UnivariateTerm>,
        pairwise: Vec<PairwiseTerm>,
    ) -> Result<Self> {
        let name = |i: usize| -> Result<&str> {
            space
                .features()
                .get(i)
                .map(|f| f.name.as_str())
                .ok_or_else(|| Error::UnknownFeature(format!("#{i}")))
        };
        for term in &univariate {
            let label = name(term.feature)?;
            check_edges(&term.edges, label)?;
            if term.scores.len() != term.edges.len() + 1 {
                return Err(Error::ScoreCountMismatch {
                    term: label.to_string(),
                    edges: term.edges.len(),
                    scores: term.scores.len(),
                });
            }
        }
        for term in &pairwise {
            let (a, b) = term.features;
            let label = format!("{} x {}", name(a)?, name(b)?);
            if a == b {
                return Err(Error::InvalidModel(format!("pairwise term {label} repeats a feature")));
            }
            check_edges(&term.edges.0, &label)?;
            check_edges(&term.edges.1, &label)?;
            if term.scores.len() != term.edges.0.len() + 1 {
                return Err(Error::ScoreCountMismatch {
                    term: label,
                    edges: term.edges.0.len(),
                    scores: term.scores.len(),
                });
            }
            if let Some(row) = term.scores.iter().find(|row| row.len() != term.edges.1.len() + 1) {
                return Err(Error::ScoreCountMismatch {
                    term: label,
                    edges: term.edges.1.len(),
                    scores: row.len(),
                });
            }
        }
        Ok(AdditiveModel {
            space,
            intercept,
            univariate,
            pairwise,
        })
    }

    pub fn intercept(&self) -> &BigRational {
        &self.intercept
    }

    pub fn univariate(&self) -> &[UnivariateTerm] {
        &self.univariate
    }

    pub fn pairwise(&self) -> &[PairwiseTerm] {
        &self.pairwise
    }

    pub fn bin_count(&self) -> usize {
        self.univariate.iter().map(|t| t.scores.len()).sum()
    }

    fn logit_unchecked(&self, x: &[Binary32]) -> BigRational {
        let mut sum = self.intercept.clone();
        for t in &self.univariate {
            sum += &t.scores[bin_index(&t.edges, x[t.feature])];
        }
        for t in &self.pairwise {
            let i = bin_index(&t.edges.0, x[t.features.0]);
            let k = bin_index(&t.edges.1, x[t.features.1]);
            sum += &t.scores[i][k];
        }
        sum
    }

    /// Equivalent ensemble: one tree per term, adjacent equal bins merged.
    ///
    /// Each term becomes a balanced split tree over its merged bin edges
    /// rather than a linear chain; both select the same bin for every input.
    pub fn compile(&self) -> Ensemble {
        let mut trees = Vec::with_capacity(self.univariate.len() + self.pairwise.len());
        for t in &self.univariate {
            let (edges, scores) = merge_bins(&t.edges, &t.scores);
            trees.push(balanced(&edges, &scores, &mut |s: &BigRational| TreeNode::leaf(s.clone()), t.feature));
        }
        for t in &self.pairwise {
            let (first, second) = t.features;
            let (edges, rows) = merge_bins(&t.edges.0, &t.scores);
            trees.push(balanced(
                &edges,
                &rows,
                &mut |row: &Vec<BigRational>| {
                    let (inner_edges, inner_scores) = merge_bins(&t.edges.1, row);
                    balanced(
                        &inner_edges,
                        &inner_scores,
                        &mut |s: &BigRational| TreeNode::leaf(s.clone()),
                        second,
                    )
                },
                first,
            ));
        }
        Ensemble::new(self.space.clone(), self.intercept.clone(), trees)
            .expect("terms validated against the space")
    }
}

/// Drops every edge whose neighbouring bins carry equal values.
fn merge_bins<T: PartialEq + Clone>(edges: &[Binary32], values: &[T]) -> (Vec<Binary32>, Vec<T>) {
    let mut kept_edges = Vec::new();
    let mut kept_values = vec![values[0].clone()];
    for (edge, value) in edges.iter().zip(&values[1..]) {
        if value != kept_values.last().expect("non-empty") {
            kept_edges.push(*edge);
            kept_values.push(value.clone());
        }
    }
    (kept_edges, kept_values)
}

fn balanced<T>(
    edges: &[Binary32],
    values: &[T],
    leaf: &mut dyn FnMut(&T) -> TreeNode,
    feature: usize,
) -> TreeNode {
    if values.len() == 1 {
        return leaf(&values[0]);
    }
    let mid = edges.len() / 2;
    let left = balanced(&edges[..mid], &values[..=mid], leaf, feature);
    let right = balanced(&edges[mid + 1..], &values[mid + 1..], leaf, feature);
    TreeNode::split(feature, edges[mid], left, right)
}

impl LogitModel for AdditiveModel {
    fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn evaluate_exact(&self, point: &Point) -> Result<BigRational> {
        self.space.check_point(point)?;
        Ok(self.logit_unchecked(point.coords()))
    }
}
