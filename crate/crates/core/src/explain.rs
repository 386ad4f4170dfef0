//! Subset-minimal sufficient reasons for individual predictions.

use num_rational::BigRational;
use num_traits::Zero;

use crate::model::{predicted_class, Class, Ensemble, Interval, LogitModel, Point};
use crate::spec::{ExistentialQuery, LogitCondition};
use crate::verify::{decide_existential, Limits, Status};
use crate::{Error, Result};

/// Features whose values at `instance` force the prediction on every
/// in-domain completion of the remaining features.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientReason {
    pub instance: Point,
    pub logit: BigRational,
    pub predicted: Class,
    /// Feature indices in ascending order.
    pub features: Vec<usize>,
    pub queries_used: usize,
    /// Set when the logit is exactly zero: the instance is classified
    /// negative by the strict rule and the explanation targets that class.
    pub on_boundary: bool,
}

impl SufficientReason {
    pub fn warning(&self) -> Option<&'static str> {
        self.on_boundary
            .then_some("logit is exactly 0: the instance sits on the decision boundary and is classified negative")
    }
}

/// Query for a completion of `fixed` whose prediction differs from `class`.
fn flip_query(model: &Ensemble, instance: &Point, fixed: &[bool], class: Class) -> ExistentialQuery {
    let mut bx = model.space().domain_box();
    for (j, keep) in fixed.iter().enumerate() {
        if *keep {
            bx.intervals[j] = Interval::point(instance[j]);
        }
    }
    let target = match class {
        Class::Positive => LogitCondition::non_positive(),
        Class::Negative => LogitCondition::above(BigRational::zero()),
    };
    ExistentialQuery {
        constraint_box: Some(bx),
        target,
    }
}

fn mask(d: usize, subset: &[usize]) -> Result<Vec<bool>> {
    let mut fixed = vec![false; d];
    for &j in subset {
        *fixed
            .get_mut(j)
            .ok_or_else(|| Error::InvalidOrder(format!("feature index {j} out of range")))? = true;
    }
    Ok(fixed)
}

fn sufficient_mask(model: &Ensemble, instance: &Point, fixed: &[bool], class: Class, limits: &Limits) -> Result<bool> {
    let verdict = decide_existential(model, &flip_query(model, instance, fixed, class), limits)?;
    Ok(verdict.status == Status::Proven)
}

/// True iff fixing the features in `subset` to the instance's values forces
/// the instance's predicted class everywhere in the domain.
pub fn is_sufficient(model: &Ensemble, instance: &Point, subset: &[usize], limits: &Limits) -> Result<bool> {
    let class = predicted_class(&model.evaluate_exact(instance)?);
    sufficient_mask(model, instance, &mask(model.space().len(), subset)?, class, limits)
}

/// Deletion-based greedy search: starting from every feature, drops each
/// feature of `order` in turn when the remainder stays sufficient. The
/// default order is ascending feature index. The result is subset-minimal;
/// different orders may give different sets.
pub fn abductive_explanation(
    model: &Ensemble,
    instance: &Point,
    order: Option<&[usize]>,
    limits: &Limits,
) -> Result<SufficientReason> {
    let d = model.space().len();
    let logit = model.evaluate_exact(instance)?;
    let class = predicted_class(&logit);
    let default_order: Vec<usize> = (0..d).collect();
    let order = order.unwrap_or(&default_order);
    let mut seen = vec![false; d];
    for &j in order {
        if j >= d || std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidOrder(format!("{order:?} is not a permutation of 0..{d}")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidOrder(format!("{order:?} is not a permutation of 0..{d}")));
    }

    let mut fixed = vec![true; d];
    let mut queries_used = 0;
    for &j in order {
        fixed[j] = false;
        queries_used += 1;
        if !sufficient_mask(model, instance, &fixed, class, limits)? {
            fixed[j] = true;
        }
    }
    Ok(SufficientReason {
        instance: instance.clone(),
        on_boundary: logit.is_zero(),
        logit,
        predicted: class,
        features: (0..d).filter(|&j| fixed[j]).collect(),
        queries_used,
    })
}
