//! Year-indexed value series and the base-year relative deviation they share.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

/// Base values with magnitude below this are treated as zero.
pub const DEGENERATE_BASE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("base year {0} has no value")]
    MissingBase(i32),
    #[error("degenerate base year {year}: base value {value:e} is too close to zero")]
    DegenerateBase { year: i32, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSeries {
    pub name: String,
    pub base_year: i32,
    pub points: BTreeMap<i32, f64>,
    /// Number of units (countries, nodes) behind each point.
    pub effective_n: BTreeMap<i32, usize>,
}

/// `(value − base) / |base|`
pub fn relative_deviation(value: f64, base: f64) -> f64 {
    (value - base) / base.abs()
}

/// Re-expresses `values` as relative deviations from `values[base_year]`.
pub fn rebase(
    name: &str,
    values: &BTreeMap<i32, f64>,
    effective_n: BTreeMap<i32, usize>,
    base_year: i32,
) -> Result<IndexSeries, SeriesError> {
    let base = *values.get(&base_year).ok_or(SeriesError::MissingBase(base_year))?;
    if base.abs() < DEGENERATE_BASE {
        return Err(SeriesError::DegenerateBase {
            year: base_year,
            value: base,
        });
    }
    Ok(IndexSeries {
        name: name.to_string(),
        base_year,
        points: values.iter().map(|(&y, &v)| (y, relative_deviation(v, base))).collect(),
        effective_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_arithmetic() {
        assert!((relative_deviation(0.3, 0.2) - 0.5).abs() < 1e-15);
        assert!((relative_deviation(-0.2, -0.1) + 1.0).abs() < 1e-15);
        assert!((relative_deviation(-0.1, -0.2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rebase_zeroes_base_year() {
        let values = BTreeMap::from([(1990, 0.3), (1995, 0.2), (2000, 0.1)]);
        let s = rebase("x", &values, BTreeMap::new(), 1995).unwrap();
        assert_eq!(s.points[&1995], 0.0);
        assert!((s.points[&2000] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rebase_errors() {
        let values = BTreeMap::from([(1990, 0.0), (1995, 0.2)]);
        assert_eq!(
            rebase("x", &values, BTreeMap::new(), 1980),
            Err(SeriesError::MissingBase(1980))
        );
        assert!(matches!(
            rebase("x", &values, BTreeMap::new(), 1990),
            Err(SeriesError::DegenerateBase { .. })
        ));
    }
}
