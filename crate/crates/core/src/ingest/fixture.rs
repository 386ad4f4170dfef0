//! Recorded predictions: CSV with one column per feature plus `logit`.

use num_rational::BigRational;
use num_traits::Signed;

use crate::model::decimal::{parse_decimal, to_f64};
use crate::model::{Binary32, FeatureSpace, LogitModel, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureRow {
    pub point: Point,
    pub expected_logit: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionFixture {
    pub rows: Vec<FixtureRow>,
}

/// Reads a fixture. Columns are matched to features by header name, in any
/// order; coordinates are cast to the nearest binary32 value and must lie in
/// the space.
pub fn parse_fixture(text: &str, space: &FeatureSpace) -> Result<PredictionFixture> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedFixture(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MalformedFixture(format!("missing column `{name}`")))
    };
    let feature_columns = space.names().map(column).collect::<Result<Vec<_>>>()?;
    let logit_column = column("logit")?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedFixture(format!("row {}: {e}", i + 1)))?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let coords = feature_columns
            .iter()
            .map(|&c| {
                Binary32::parse_nearest(field(c))
                    .ok_or_else(|| Error::MalformedFixture(format!("row {}: `{}` is not a number", i + 1, field(c))))
            })
            .collect::<Result<Vec<_>>>()?;
        let point = Point::new(coords);
        space.check_point(&point)?;
        let expected_logit = parse_decimal(field(logit_column))
            .ok_or_else(|| Error::MalformedFixture(format!("row {}: bad logit `{}`", i + 1, field(logit_column))))?;
        rows.push(FixtureRow { point, expected_logit });
    }
    Ok(PredictionFixture { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailingRow {
    /// Zero-based data row.
    pub row: usize,
    pub expected: f64,
    pub actual: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureReport {
    pub rows_checked: usize,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub failing_rows: Vec<FailingRow>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.failing_rows.is_empty()
    }
}

/// Compares exact model logits against recorded ones.
pub fn validate_against_fixture(
    model: &dyn LogitModel,
    fixture: &PredictionFixture,
    tolerance: f64,
) -> Result<FixtureReport> {
    let mut report = FixtureReport {
        rows_checked: fixture.rows.len(),
        max_abs_deviation: 0.0,
        tolerance,
        failing_rows: Vec::new(),
    };
    for (row, r) in fixture.rows.iter().enumerate() {
        let actual = model.evaluate_exact(&r.point)?;
        let deviation = to_f64(&(&actual - &r.expected_logit).abs());
        report.max_abs_deviation = report.max_abs_deviation.max(deviation);
        if deviation > tolerance {
            report.failing_rows.push(FailingRow {
                row,
                expected: to_f64(&r.expected_logit),
                actual: to_f64(&actual),
                deviation,
            });
        }
    }
    Ok(report)
}

/// Fixture text recording `model`'s own logits at `points`.
pub fn write_fixture(model: &dyn LogitModel, points: &[Point]) -> Result<String> {
    let mut out = model.space().names().collect::<Vec<_>>().join(",");
    out.push_str(",logit\n");
    for p in points {
        let logit = model.evaluate_exact(p)?;
        let coords: Vec<String> = p.coords().iter().map(|x| x.to_string()).collect();
        out.push_str(&coords.join(","));
        out.push(',');
        out.push_str(&super::gbt::weight_text(&logit));
        out.push('\n');
    }
    Ok(out)
}
