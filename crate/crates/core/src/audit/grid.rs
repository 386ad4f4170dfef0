//! Uniform grid baseline. Detects violations at sampled points only; a
//! clean grid proves nothing.

use std::ops::{AddAssign, SubAssign};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::model::{Binary32, Ensemble, LogitModel, Point};
use crate::spec::{LogitOp, ThresholdImplication};
use crate::verify::{fits_i128, scale_and_magnitude, Compiled, Score};
use crate::{Error, Result};

/// Printed with every grid result.
pub const GRID_SEMANTICS: &str = "grid search evaluates sampled points only: it can find violations but never proves a specification";

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    /// Points per feature, both domain endpoints included.
    pub n: usize,
    /// `n ^ d`.
    pub total_points: u128,
    /// Grid points satisfying the premise.
    pub premise_count: u128,
    pub violations_found: u128,
    /// First violating point in row-major order, with its exact logit.
    pub first_violation: Option<(Point, BigRational)>,
    pub elapsed: Duration,
}

/// `n` evenly spaced values from `lower` to `upper`, each cast to binary32.
pub fn grid_values(lower: Binary32, upper: Binary32, n: usize) -> Vec<Binary32> {
    let (lo, hi) = (lower.get() as f64, upper.get() as f64);
    (0..n)
        .map(|i| {
            let x = if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            Binary32::new(x as f32).unwrap_or(lower).clamp(lower, upper)
        })
        .collect()
}

/// Evaluates `spec` at every point of an `n`-per-feature grid over the
/// domain and counts premise points and violations.
pub fn grid_check(model: &Ensemble, spec: &ThresholdImplication, n: usize) -> Result<GridReport> {
    if n < 2 {
        return Err(Error::InvalidModel(format!("grid needs at least 2 points per feature, got {n}")));
    }
    let start = Instant::now();
    let space = model.space();
    let d = space.len();
    let total_points = (0..d).try_fold(1u128, |acc, _| acc.checked_mul(n as u128));
    let total_points = total_points.ok_or_else(|| Error::InvalidModel("grid size overflows".into()))?;
    // Premise atoms are per-feature, so the premise region of the grid is a
    // product of per-feature value lists.
    let axes: Vec<Vec<(usize, Binary32)>> = space
        .features()
        .iter()
        .enumerate()
        .map(|(j, f)| {
            grid_values(f.lower, f.upper, n)
                .into_iter()
                .enumerate()
                .filter(|(_, x)| spec.premise.iter().filter(|a| a.feature == j).all(|a| a.op.holds(*x, a.constant)))
                .collect()
        })
        .collect();
    let premise_count = axes.iter().map(|a| a.len() as u128).product();

    let (scale, magnitude) = scale_and_magnitude(model, &[&spec.conclusion.constant], 1);
    let (violations_found, first) = if fits_i128(&magnitude) {
        scan::<i128>(model, spec, &axes, &scale)?
    } else {
        scan::<BigInt>(model, spec, &axes, &scale)?
    };
    let first_violation = match first {
        None => None,
        Some(coords) => {
            let point = Point::new(coords);
            let logit = model.evaluate_exact(&point)?;
            if !spec.premise_holds(point.coords()) || spec.conclusion.holds(&logit) {
                return Err(Error::Internal("grid violation failed exact re-evaluation".into()));
            }
            Some((point, logit))
        }
    };
    Ok(GridReport {
        n,
        total_points,
        premise_count,
        violations_found,
        first_violation,
        elapsed: start.elapsed(),
    })
}

type Scan = (u128, Option<Vec<Binary32>>);

fn scan<S: Score>(
    model: &Ensemble,
    spec: &ThresholdImplication,
    axes: &[Vec<(usize, Binary32)>],
    scale: &BigInt,
) -> Result<Scan>
where
    S: for<'a> AddAssign<&'a S> + for<'a> SubAssign<&'a S>,
{
    let overflow = || Error::Internal("scaled value exceeds the integer type".into());
    let compiled = Compiled::<S>::new(model, &model.space().domain_ranges(), scale).ok_or_else(overflow)?;
    let c = compiled.scaled(&spec.conclusion.constant).ok_or_else(overflow)?;
    let violates = |s: &S| match spec.conclusion.op {
        LogitOp::Le => *s > c,
        LogitOp::Gt => *s <= c,
    };
    if axes.iter().any(Vec::is_empty) {
        return Ok((0, None));
    }
    let d = axes.len();
    let per_first: Vec<Scan> = axes[0]
        .par_iter()
        .map(|&(_, x0)| {
            let mut count = 0u128;
            let mut first = None;
            let mut idx = vec![0usize; d];
            let mut keys: Vec<i32> = axes.iter().map(|a| a[0].1.key()).collect();
            keys[0] = x0.key();
            loop {
                if violates(&compiled.evaluate(&keys)) {
                    count += 1;
                    if first.is_none() {
                        first = Some(keys.iter().map(|k| Binary32::from_key(*k).expect("grid key")).collect());
                    }
                }
                // odometer over features 1..d, last feature fastest
                let mut j = d;
                loop {
                    j -= 1;
                    if j == 0 {
                        return (count, first);
                    }
                    idx[j] += 1;
                    if idx[j] < axes[j].len() {
                        keys[j] = axes[j][idx[j]].1.key();
                        break;
                    }
                    idx[j] = 0;
                    keys[j] = axes[j][0].1.key();
                }
            }
        })
        .collect();
    Ok(per_first.into_iter().fold((0, None), |(n, first), (m, f)| (n + m, first.or(f))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::decimal::parse_decimal;
    use crate::model::TreeNode;
    use crate::spec::{parse_atom, LogitCondition};
    use crate::testing::{worked_example, worked_space};

    fn spec(atoms: &[&str]) -> ThresholdImplication {
        let space = worked_space();
        ThresholdImplication {
            premise: atoms.iter().map(|a| parse_atom(a, &space, "t").unwrap()).collect(),
            conclusion: LogitCondition::non_positive(),
        }
    }

    #[test]
    fn endpoints_included() {
        let (lo, hi) = (Binary32::new(0.33).unwrap(), Binary32::new(0.57).unwrap());
        let v = grid_values(lo, hi, 5);
        assert_eq!(v.len(), 5);
        assert_eq!((v[0], v[4]), (lo, hi));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn total_is_n_to_the_d() {
        let r = grid_check(&worked_example(), &spec(&["g > 5.0"]), 30).unwrap();
        assert_eq!(r.total_points, 810_000);
        assert!(r.premise_count < r.total_points);
        assert!(r.violations_found > 0);
        let (p, logit) = r.first_violation.unwrap();
        assert!(p[0] > Binary32::new(5.0).unwrap());
        assert!(logit > BigRational::from_integer(0.into()));
    }

    #[test]
    fn constant_model_true_premise() {
        let m = Ensemble::new(worked_space(), BigRational::from_integer(0.into()), vec![TreeNode::leaf(parse_decimal("-1").unwrap())]).unwrap();
        let r = grid_check(&m, &spec(&[]), 2).unwrap();
        assert_eq!(r.premise_count, 16);
        assert_eq!(r.violations_found, 0);
        assert!(r.first_violation.is_none());
    }

    #[test]
    fn counts_match_brute_force() {
        let m = worked_example();
        let s = spec(&["l > 2.5", "p < 0.45"]);
        let n = 7;
        let r = grid_check(&m, &s, n).unwrap();
        let space = worked_space();
        let axes: Vec<Vec<Binary32>> = space.features().iter().map(|f| grid_values(f.lower, f.upper, n)).collect();
        let (mut premise, mut bad) = (0u128, 0u128);
        for a in &axes[0] {
            for b in &axes[1] {
                for c in &axes[2] {
                    for e in &axes[3] {
                        let p = Point::new(vec![*a, *b, *c, *e]);
                        if s.premise_holds(p.coords()) {
                            premise += 1;
                            if !s.conclusion.holds(&m.evaluate_exact(&p).unwrap()) {
                                bad += 1;
                            }
                        }
                    }
                }
            }
        }
        assert_eq!((r.premise_count, r.violations_found), (premise, bad));
        assert!(grid_check(&m, &s, 1).is_err());
    }
}
