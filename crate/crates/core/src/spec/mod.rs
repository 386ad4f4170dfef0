//! Specifications over a model's logit and their negation into existential
//! queries.

mod parse;
mod query;

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

pub use parse::{parse_atom, parse_spec_entries, parse_specs};
pub use query::{negate, premise_box, premise_subsumes, ExistentialQuery};

use crate::model::decimal::format_rational;
use crate::model::{Binary32, FeatureSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, x: Binary32, c: Binary32) -> bool {
        match self {
            CmpOp::Lt => x < c,
            CmpOp::Le => x <= c,
            CmpOp::Gt => x > c,
            CmpOp::Ge => x >= c,
        }
    }

    /// Rounds a decimal constant to a binary32 constant so that, for every
    /// binary32 `x`, `x op rounded` holds iff `x op value` does.
    pub fn binary32_constant(self, value: &BigRational) -> Option<Binary32> {
        match self {
            CmpOp::Lt | CmpOp::Ge => Binary32::round_up(value),
            CmpOp::Le | CmpOp::Gt => Binary32::round_down(value),
        }
    }
}

/// `feature op constant`, with the constant already in binary32 form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub feature: usize,
    pub op: CmpOp,
    pub constant: Binary32,
}

impl Atom {
    pub fn holds(&self, coords: &[Binary32]) -> bool {
        self.op.holds(coords[self.feature], self.constant)
    }

    pub fn display(&self, space: &FeatureSpace) -> String {
        format!("{} {} {}", space.feature(self.feature).name, self.op.symbol(), self.constant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogitOp {
    Le,
    Gt,
}

/// `logit op constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LogitCondition {
    pub op: LogitOp,
    pub constant: BigRational,
}

impl LogitCondition {
    pub fn at_most(constant: BigRational) -> Self {
        LogitCondition { op: LogitOp::Le, constant }
    }

    pub fn above(constant: BigRational) -> Self {
        LogitCondition { op: LogitOp::Gt, constant }
    }

    /// `logit <= 0`, the default conclusion.
    pub fn non_positive() -> Self {
        Self::at_most(BigRational::zero())
    }

    pub fn negated(&self) -> Self {
        LogitCondition {
            op: match self.op {
                LogitOp::Le => LogitOp::Gt,
                LogitOp::Gt => LogitOp::Le,
            },
            constant: self.constant.clone(),
        }
    }

    pub fn holds(&self, logit: &BigRational) -> bool {
        match self.op {
            LogitOp::Le => *logit <= self.constant,
            LogitOp::Gt => *logit > self.constant,
        }
    }
}

impl fmt::Display for LogitCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            LogitOp::Le => "<=",
            LogitOp::Gt => ">",
        };
        write!(f, "logit {op} {}", format_rational(&self.constant))
    }
}

/// `forall x in domain: premise(x) => conclusion(f(x))`. An empty premise
/// is `true`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdImplication {
    pub premise: Vec<Atom>,
    pub conclusion: LogitCondition,
}

impl ThresholdImplication {
    pub fn premise_holds(&self, coords: &[Binary32]) -> bool {
        self.premise.iter().all(|a| a.holds(coords))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
}

impl Direction {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "non-decreasing" | "nondecreasing" | "increasing" => Ok(Direction::NonDecreasing),
            "non-increasing" | "nonincreasing" | "decreasing" => Ok(Direction::NonIncreasing),
            other => Err(Error::UnknownDirection(other.to_string())),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::NonDecreasing => "non-decreasing",
            Direction::NonIncreasing => "non-increasing",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monotonicity {
    pub feature: usize,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecBody {
    Implication(ThresholdImplication),
    Monotone(Monotonicity),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Specification {
    pub id: String,
    pub body: SpecBody,
}

impl Specification {
    pub fn kind(&self) -> &'static str {
        match self.body {
            SpecBody::Implication(_) => "implication",
            SpecBody::Monotone(_) => "monotone",
        }
    }

    pub fn describe(&self, space: &FeatureSpace) -> String {
        match &self.body {
            SpecBody::Implication(t) => {
                let premise: Vec<String> = t.premise.iter().map(|a| a.display(space)).collect();
                let premise = if premise.is_empty() { "true".to_string() } else { premise.join(" and ") };
                format!("{premise} => {}", t.conclusion)
            }
            SpecBody::Monotone(m) => format!("{} {}", space.feature(m.feature).name, m.direction),
        }
    }
}

/// One entry of a specification file; `spec` holds the entry's own parse
/// error if it has one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecEntry {
    pub id: String,
    pub spec: Result<Specification>,
}

impl From<Specification> for SpecEntry {
    fn from(spec: Specification) -> Self {
        SpecEntry {
            id: spec.id.clone(),
            spec: Ok(spec),
        }
    }
}
