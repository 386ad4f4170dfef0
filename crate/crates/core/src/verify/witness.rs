use crate::model::{Binary32, InputBox, Interval, KeyRange, Point};
use crate::{Error, Result};

/// A binary32 point inside every interval of `cell`: the midpoint of each
/// interval rounded to binary32, moved to the nearest interior value when
/// rounding lands on an open endpoint.
pub fn extract_witness(cell: &InputBox) -> Result<Point> {
    cell.intervals
        .iter()
        .map(|interval| {
            let range = interval
                .key_range()
                .ok_or_else(|| Error::DegenerateInterval(interval.to_string()))?;
            Ok(clamp(Binary32::midpoint(interval.lo, interval.hi), range))
        })
        .collect::<Result<Vec<_>>>()
        .map(Point::new)
}

fn clamp(x: Binary32, range: KeyRange) -> Binary32 {
    Binary32::from_key(x.key().clamp(range.lo, range.hi)).expect("key inside a finite range")
}

pub(crate) fn box_of(ranges: &[KeyRange]) -> InputBox {
    InputBox::new(ranges.iter().map(|r| r.to_interval()).collect())
}

pub(crate) fn midpoint_of(range: KeyRange) -> Binary32 {
    let interval: Interval = range.to_interval();
    clamp(Binary32::midpoint(interval.lo, interval.hi), range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(v: f32) -> Binary32 {
        Binary32::new(v).unwrap()
    }

    #[test]
    fn open_lower_end() {
        let cell = InputBox::new(vec![Interval::new(b(2.5), false, b(3.29), true).unwrap()]);
        let w = extract_witness(&cell).unwrap();
        assert!(w[0] > b(2.5) && w[0] <= b(3.29));
        assert!(cell.contains(&w));
    }

    #[test]
    fn point_interval() {
        let cell = InputBox::new(vec![Interval::point(b(5.0))]);
        assert_eq!(extract_witness(&cell).unwrap()[0], b(5.0));
    }

    #[test]
    fn open_gap_between_neighbours_is_degenerate() {
        let lo = b(1.0);
        let cell = InputBox::new(vec![Interval::new(lo, false, lo.next_up().unwrap(), false).unwrap()]);
        assert!(matches!(extract_witness(&cell), Err(Error::DegenerateInterval(_))));
        // one value strictly between
        let hi = lo.next_up().unwrap().next_up().unwrap();
        let cell = InputBox::new(vec![Interval::new(lo, false, hi, false).unwrap()]);
        assert_eq!(extract_witness(&cell).unwrap()[0], lo.next_up().unwrap());
    }

    proptest! {
        #[test]
        fn witness_lies_inside(a in -1.0e6f32..1.0e6, width in 0u32..1_000_000, lc: bool, hc: bool) {
            let lo = b(a);
            let hi = Binary32::from_key(lo.key() + width as i32).unwrap();
            if let Some(interval) = Interval::new(lo, lc, hi, hc) {
                let cell = InputBox::new(vec![interval]);
                match extract_witness(&cell) {
                    Ok(w) => prop_assert!(cell.contains(&w)),
                    Err(Error::DegenerateInterval(_)) => prop_assert!(interval.key_range().is_none()),
                    Err(e) => prop_assert!(false, "{e}"),
                }
            }
        }
    }
}
