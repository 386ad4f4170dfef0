use super::{Atom, CmpOp, LogitCondition, ThresholdImplication};
use crate::model::{FeatureSpace, InputBox};
use crate::{Error, Result};

/// `exists x in constraint_box: target(f(x))`. A `None` box means the
/// premise is unsatisfiable in the domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistentialQuery {
    pub constraint_box: Option<InputBox>,
    pub target: LogitCondition,
}

/// Domain intersected with the premise half-spaces; strict atoms give open
/// endpoints. `None` when the intersection is empty.
pub fn premise_box(premise: &[Atom], space: &FeatureSpace) -> Option<InputBox> {
    let mut bx = space.domain_box();
    for atom in premise {
        let interval = &mut bx.intervals[atom.feature];
        let restricted = match atom.op {
            CmpOp::Lt => interval.below(atom.constant),
            CmpOp::Le => interval.at_most(atom.constant),
            CmpOp::Gt => interval.above(atom.constant),
            CmpOp::Ge => interval.at_least(atom.constant),
        }?;
        *interval = restricted;
    }
    Some(bx)
}

/// Negates an implication into an existential query.
pub fn negate(spec: &ThresholdImplication, space: &FeatureSpace) -> ExistentialQuery {
    ExistentialQuery {
        constraint_box: premise_box(&spec.premise, space),
        target: spec.conclusion.negated(),
    }
}

/// True iff every binary32 point satisfying `b`'s premise satisfies `a`'s,
/// so that proving `a` proves `b`.
pub fn premise_subsumes(a: &ThresholdImplication, b: &ThresholdImplication, space: &FeatureSpace) -> Result<bool> {
    if a.conclusion != b.conclusion {
        return Err(Error::ConclusionMismatch(a.conclusion.to_string(), b.conclusion.to_string()));
    }
    let ranges = |spec: &ThresholdImplication| premise_box(&spec.premise, space).and_then(|bx| bx.key_ranges());
    Ok(match (ranges(a), ranges(b)) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(outer), Some(inner)) => inner.iter().zip(&outer).all(|(i, o)| i.is_subset_of(o)),
    })
}
