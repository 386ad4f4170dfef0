use std::collections::HashSet;
use std::fmt;

use num_rational::BigRational;

use super::binary32::Binary32;
use crate::{Error, Result};

/// A named input feature with a closed, binary32-bounded domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub lower: Binary32,
    pub upper: Binary32,
}

/// Ordered features; every query quantifies over the product of their domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpace {
    features: Vec<Feature>,
}

impl FeatureSpace {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidSpace("at least one feature is required".into()));
        }
        let mut seen = HashSet::new();
        for f in &features {
            if f.name.trim().is_empty() {
                return Err(Error::InvalidSpace("feature names must be non-empty".into()));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate feature `{}`", f.name)));
            }
            if f.lower > f.upper {
                return Err(Error::InvalidSpace(format!(
                    "feature `{}` has lower {} > upper {}",
                    f.name, f.lower, f.upper
                )));
            }
        }
        Ok(FeatureSpace { features })
    }

    /// Builds a space from decimal bounds. Bounds that are not binary32 values
    /// are rounded inward, so the space holds exactly the binary32 points of
    /// the stated real box.
    pub fn from_decimal_bounds<S: AsRef<str>>(bounds: &[(S, &BigRational, &BigRational)]) -> Result<Self> {
        let features = bounds
            .iter()
            .map(|(name, lower, upper)| {
                let lo = Binary32::round_up(lower)
                    .ok_or_else(|| Error::NonRepresentable(super::decimal::format_rational(lower)))?;
                let hi = Binary32::round_down(upper)
                    .ok_or_else(|| Error::NonRepresentable(super::decimal::format_rational(upper)))?;
                Ok(Feature {
                    name: name.as_ref().to_string(),
                    lower: lo,
                    upper: hi,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(features)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &Feature {
        &self.features[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn resolve(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    /// The whole domain as a box of closed intervals.
    pub fn domain_box(&self) -> InputBox {
        InputBox {
            intervals: self
                .features
                .iter()
                .map(|f| Interval::closed(f.lower, f.upper).expect("space invariant lower <= upper"))
                .collect(),
        }
    }

    pub fn domain_ranges(&self) -> Vec<KeyRange> {
        self.features
            .iter()
            .map(|f| KeyRange::new(f.lower.key(), f.upper.key()).expect("space invariant"))
            .collect()
    }

    pub fn contains(&self, point: &Point) -> bool {
        self.check_point(point).is_ok()
    }

    pub fn check_point(&self, point: &Point) -> Result<()> {
        if point.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: point.len(),
            });
        }
        for (index, (f, x)) in self.features.iter().zip(point.coords()).enumerate() {
            if *x < f.lower || *x > f.upper {
                return Err(Error::PointOutOfDomain {
                    index,
                    feature: f.name.clone(),
                    value: x.to_string(),
                    lower: f.lower.to_string(),
                    upper: f.upper.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// A real interval with binary32 endpoints; each endpoint open or closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Binary32,
    pub lo_closed: bool,
    pub hi: Binary32,
    pub hi_closed: bool,
}

impl Interval {
    /// Returns `None` when the interval is empty over the reals.
    pub fn new(lo: Binary32, lo_closed: bool, hi: Binary32, hi_closed: bool) -> Option<Self> {
        let non_empty = lo < hi || (lo == hi && lo_closed && hi_closed);
        non_empty.then_some(Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        })
    }

    pub fn closed(lo: Binary32, hi: Binary32) -> Option<Self> {
        Self::new(lo, true, hi, true)
    }

    pub fn point(x: Binary32) -> Self {
        Interval {
            lo: x,
            lo_closed: true,
            hi: x,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: Binary32) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// The binary32 values inside the interval, or `None` if there are none
    /// (an open interval between adjacent binary32 values).
    pub fn key_range(&self) -> Option<KeyRange> {
        let lo = if self.lo_closed { self.lo.key() } else { self.lo.key().checked_add(1)? };
        let hi = if self.hi_closed { self.hi.key() } else { self.hi.key().checked_sub(1)? };
        KeyRange::new(lo, hi)
    }

    /// Restricts to `x < threshold`.
    pub fn below(&self, threshold: Binary32) -> Option<Self> {
        if threshold <= self.hi {
            Self::new(self.lo, self.lo_closed, threshold, false)
        } else {
            Some(*self)
        }
    }

    /// Restricts to `x <= threshold`.
    pub fn at_most(&self, threshold: Binary32) -> Option<Self> {
        if threshold < self.hi {
            Self::new(self.lo, self.lo_closed, threshold, true)
        } else {
            Some(*self)
        }
    }

    /// Restricts to `x > threshold`.
    pub fn above(&self, threshold: Binary32) -> Option<Self> {
        if threshold >= self.lo {
            Self::new(threshold, false, self.hi, self.hi_closed)
        } else {
            Some(*self)
        }
    }

    /// Restricts to `x >= threshold`.
    pub fn at_least(&self, threshold: Binary32) -> Option<Self> {
        if threshold > self.lo {
            Self::new(threshold, true, self.hi, self.hi_closed)
        } else {
            Some(*self)
        }
    }

    /// True if some real point of the interval is `< threshold`.
    pub fn reaches_below(&self, threshold: Binary32) -> bool {
        self.lo < threshold
    }

    /// True if some real point of the interval is `>= threshold`.
    pub fn reaches_at_or_above(&self, threshold: Binary32) -> bool {
        self.hi > threshold || (self.hi == threshold && self.hi_closed)
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => other.lo_closed || !self.lo_closed,
            std::cmp::Ordering::Less => false,
        };
        let hi_ok = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Equal => other.hi_closed || !self.hi_closed,
            std::cmp::Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Closed, non-empty range of binary32 ordinal keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyRange {
    pub lo: i32,
    pub hi: i32,
}

impl KeyRange {
    pub fn new(lo: i32, hi: i32) -> Option<Self> {
        (lo <= hi).then_some(KeyRange { lo, hi })
    }

    pub fn point(key: i32) -> Self {
        KeyRange { lo: key, hi: key }
    }

    pub fn contains(&self, key: i32) -> bool {
        self.lo <= key && key <= self.hi
    }

    pub fn intersect(&self, other: &KeyRange) -> Option<KeyRange> {
        KeyRange::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn is_subset_of(&self, other: &KeyRange) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn to_interval(self) -> Interval {
        let lo = Binary32::from_key(self.lo).expect("finite key");
        let hi = Binary32::from_key(self.hi).expect("finite key");
        Interval::closed(lo, hi).expect("lo <= hi")
    }
}

/// One interval per feature, aligned with a [`FeatureSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputBox {
    pub intervals: Vec<Interval>,
}

impl InputBox {
    pub fn new(intervals: Vec<Interval>) -> Self {
        InputBox { intervals }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, point: &Point) -> bool {
        point.len() == self.len()
            && self.intervals.iter().zip(point.coords()).all(|(i, x)| i.contains(*x))
    }

    /// Binary32 points of the box as key ranges; `None` if some coordinate
    /// admits no binary32 value.
    pub fn key_ranges(&self) -> Option<Vec<KeyRange>> {
        self.intervals.iter().map(Interval::key_range).collect()
    }

    pub fn is_subset_of(&self, other: &InputBox) -> bool {
        self.len() == other.len()
            && self
                .intervals
                .iter()
                .zip(&other.intervals)
                .all(|(a, b)| a.is_subset_of(b))
    }

    pub(crate) fn check_within(&self, space: &FeatureSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: self.len(),
            });
        }
        if !self.is_subset_of(&space.domain_box()) {
            return Err(Error::BoxOutsideDomain(self.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for InputBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// An input point; one binary32 coordinate per feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point(Vec<Binary32>);

impl Point {
    pub fn new(coords: Vec<Binary32>) -> Self {
        Point(coords)
    }

    pub fn from_f32s(values: &[f32]) -> Result<Self> {
        values.iter().map(|v| Binary32::try_from(*v)).collect::<Result<Vec<_>>>().map(Point)
    }

    /// Requires every coordinate to be exactly representable.
    pub fn from_rationals(values: &[BigRational]) -> Result<Self> {
        values
            .iter()
            .map(|v| {
                Binary32::from_rational_exact(v)
                    .ok_or_else(|| Error::NonRepresentable(super::decimal::format_rational(v)))
            })
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }

    /// Casts each decimal to the nearest binary32 value.
    pub fn cast_decimals<S: AsRef<str>>(values: &[S]) -> Result<Self> {
        values
            .iter()
            .map(|v| {
                Binary32::parse_nearest(v.as_ref()).ok_or_else(|| Error::NonRepresentable(v.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }

    pub fn coords(&self) -> &[Binary32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn keys(&self) -> Vec<i32> {
        self.0.iter().map(|x| x.key()).collect()
    }
}

impl std::ops::Index<usize> for Point {
    type Output = Binary32;

    fn index(&self, index: usize) -> &Binary32 {
        &self.0[index]
    }
}
