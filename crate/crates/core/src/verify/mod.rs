//! Exact decision procedures: branch-and-bound over split thresholds for
//! existential queries, monotonicity checks, and witness extraction.

mod compiled;
mod monotone;
mod search;
mod suite;
mod threshold;
mod witness;

use std::fmt;
use std::time::Duration;

use num_rational::BigRational;

use crate::model::decimal::probability;
use crate::model::Point;

pub use monotone::{check_monotone_direct, check_monotone_per_tree, PerTreeResult, TreeDefect};
pub use suite::{verify_specs, verify_suite, Method, SpecResult, SuiteEntry};
pub use threshold::{check_threshold_spec, decide_existential};
pub use witness::extract_witness;

pub(crate) use compiled::{fits_i128, scale_and_magnitude, Compiled, Score};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Proven,
    Violated,
    /// Only produced by the per-tree monotonicity check.
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proven => "proven",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// A validated violation. Threshold specs carry one point; monotonicity
/// specs carry two points differing only in the monotone feature, the
/// first with the smaller value.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub points: Vec<Point>,
    pub logits: Vec<BigRational>,
}

impl Counterexample {
    pub fn point(&self) -> &Point {
        &self.points[0]
    }

    pub fn logit(&self) -> &BigRational {
        &self.logits[0]
    }

    /// Display-only sigmoid of each logit.
    pub fn probabilities(&self) -> Vec<f64> {
        self.logits.iter().map(probability).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub nodes_explored: u64,
    pub max_depth: u32,
    pub elapsed: Duration,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Counterexample>,
    pub stats: SearchStats,
}

impl Verdict {
    pub(crate) fn proven(stats: SearchStats) -> Self {
        Verdict {
            status: Status::Proven,
            witness: None,
            stats,
        }
    }

    pub fn is_proven(&self) -> bool {
        self.status == Status::Proven
    }

    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }
}

/// Search budget. Exceeding either limit yields
/// [`Error::ResourceExhausted`](crate::Error::ResourceExhausted).
/// `deterministic` forces a single-threaded depth-first, left-first search
/// so that witnesses are reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: u64,
    pub timeout: Duration,
    pub deterministic: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 10_000_000,
            timeout: Duration::from_secs(300),
            deterministic: false,
        }
    }
}

impl Limits {
    pub fn deterministic() -> Self {
        Limits {
            deterministic: true,
            ..Limits::default()
        }
    }
}
