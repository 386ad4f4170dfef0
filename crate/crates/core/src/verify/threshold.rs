use std::ops::{AddAssign, SubAssign};
use std::time::Instant;

use num_bigint::BigInt;

use super::compiled::{fits_i128, scale_and_magnitude, Compiled, Score};
use super::search::{Goal, Instance, Problem};
use super::witness::{box_of, extract_witness};
use super::{Counterexample, Limits, SearchStats, Status, Verdict};
use crate::model::{Ensemble, KeyRange, LogitModel};
use crate::spec::{negate, ExistentialQuery, LogitOp, ThresholdImplication};
use crate::{Error, Result};

/// Decides `exists x in query.constraint_box: query.target(f(x))` over
/// binary32 inputs. `Proven` means no such point exists.
pub fn decide_existential(model: &Ensemble, query: &ExistentialQuery, limits: &Limits) -> Result<Verdict> {
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let Some(bx) = &query.constraint_box else {
        stats.notes.push("premise is unsatisfiable in the domain".into());
        return Ok(Verdict::proven(stats));
    };
    bx.check_within(model.space())?;
    let Some(root) = bx.key_ranges() else {
        stats.notes.push("constraint box contains no binary32 point".into());
        return Ok(Verdict::proven(stats));
    };
    let (scale, magnitude) = scale_and_magnitude(model, &[&query.target.constant], 1);
    let found = if fits_i128(&magnitude) {
        run::<i128>(model, query, root, &scale, limits, start, &mut stats)?
    } else {
        run::<BigInt>(model, query, root, &scale, limits, start, &mut stats)?
    };
    let verdict = match found {
        None => Verdict::proven(stats),
        Some(cell) => {
            let point = extract_witness(&box_of(&cell))?;
            let logit = model.evaluate_exact(&point)?;
            if !bx.contains(&point) || !query.target.holds(&logit) {
                return Err(Error::Internal(format!("witness {point:?} failed re-validation")));
            }
            Verdict {
                status: Status::Violated,
                witness: Some(Counterexample {
                    points: vec![point],
                    logits: vec![logit],
                }),
                stats,
            }
        }
    };
    Ok(Verdict {
        stats: SearchStats {
            elapsed: start.elapsed(),
            ..verdict.stats
        },
        ..verdict
    })
}

fn run<S: Score>(
    model: &Ensemble,
    query: &ExistentialQuery,
    root: Vec<KeyRange>,
    scale: &BigInt,
    limits: &Limits,
    start: Instant,
    stats: &mut SearchStats,
) -> Result<Option<Vec<KeyRange>>>
where
    S: for<'a> AddAssign<&'a S> + for<'a> SubAssign<&'a S>,
{
    let overflow = || Error::Internal("scaled value exceeds the integer type".into());
    let compiled = Compiled::<S>::new(model, &root, scale).ok_or_else(overflow)?;
    let problem = Problem {
        trees: &compiled.trees,
        instances: (0..compiled.trees.len() as u32)
            .map(|tree| Instance {
                tree,
                negate: false,
                remap: None,
            })
            .collect(),
        constant: compiled.base.clone(),
        goal: match query.target.op {
            LogitOp::Gt => Goal::Above,
            LogitOp::Le => Goal::AtMost,
        },
        c: compiled.scaled(&query.target.constant).ok_or_else(overflow)?,
        ordering: None,
    };
    let outcome = problem.run(root, limits, start)?;
    stats.nodes_explored = outcome.nodes;
    stats.max_depth = outcome.max_depth;
    Ok(outcome.violation)
}

/// Checks `forall x: premise(x) => conclusion(f(x))` by searching for a
/// point of the negation.
pub fn check_threshold_spec(model: &Ensemble, spec: &ThresholdImplication, limits: &Limits) -> Result<Verdict> {
    let verdict = decide_existential(model, &negate(spec, model.space()), limits)?;
    if let Some(w) = &verdict.witness {
        if !spec.premise_holds(w.point().coords()) || spec.conclusion.holds(w.logit()) {
            return Err(Error::Internal("counterexample does not violate the implication".into()));
        }
    }
    Ok(verdict)
}
