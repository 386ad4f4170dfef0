//! Re-verification of a threshold spec while one premise constant varies.

use num_rational::BigRational;

use crate::model::decimal::format_rational;
use crate::model::{Binary32, Ensemble};
use crate::spec::ThresholdImplication;
use crate::verify::{check_threshold_spec, Limits, Verdict};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// The threshold as given.
    pub threshold: BigRational,
    /// Its binary32 form after directed rounding for the atom's operator.
    pub constant: Binary32,
    pub outcome: Result<Verdict>,
}

impl SweepRow {
    pub fn witness_logit(&self) -> Option<&BigRational> {
        self.outcome.as_ref().ok()?.witness.as_ref().map(|w| w.logit())
    }
}

/// One row per threshold, in input order: `template` with premise atom
/// `atom` moved to that threshold.
pub fn threshold_sweep(
    model: &Ensemble,
    template: &ThresholdImplication,
    atom: usize,
    thresholds: &[BigRational],
    limits: &Limits,
) -> Result<Vec<SweepRow>> {
    let op = template
        .premise
        .get(atom)
        .ok_or_else(|| Error::MalformedSpecs(format!("premise has no atom #{atom}")))?
        .op;
    thresholds
        .iter()
        .map(|t| {
            let constant = op
                .binary32_constant(t)
                .ok_or_else(|| Error::NonRepresentable(format_rational(t)))?;
            let mut spec = template.clone();
            spec.premise[atom].constant = constant;
            Ok(SweepRow {
                threshold: t.clone(),
                constant,
                outcome: check_threshold_spec(model, &spec, limits),
            })
        })
        .collect()
}
