//! Measure arithmetic.
//!
//! Every numeric path in the engine (fact measures, pushed attributes,
//! aggregation, pulled coordinates) is generic over [`MeasureValue`]. The
//! default instantiation is the exact scaled decimal [`Decimal`], which keeps
//! golden comparisons exact; `f64` is provided for callers that prefer binary
//! floating point.

use std::fmt::Debug;
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, ToPrimitive};
use rust_decimal::Decimal;

use crate::model::NumericType;

/// A numeric type usable as a measure value.
pub trait MeasureValue: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Parse measure text according to its declared numeric type.
    fn parse_measure(text: &str, ty: NumericType) -> Option<Self>;

    /// Parse any numeric literal (integer or decimal notation).
    fn parse_number(text: &str) -> Option<Self>;

    fn from_count(n: usize) -> Self;

    fn from_decimal(d: Decimal) -> Self;

    /// Canonical text: no trailing fractional zeros, integers without a point.
    fn canonical(&self) -> String;
}

impl MeasureValue for Decimal {
    fn parse_measure(text: &str, ty: NumericType) -> Option<Self> {
        let text = text.trim();
        match ty {
            NumericType::Integer => text.parse::<i64>().ok().map(Decimal::from),
            NumericType::Decimal => Self::parse_number(text),
        }
    }

    fn parse_number(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.is_empty() || text.contains(['e', 'E']) {
            return None;
        }
        Decimal::from_str(text).ok()
    }

    fn from_count(n: usize) -> Self {
        Decimal::from(n as u64)
    }

    fn from_decimal(d: Decimal) -> Self {
        d
    }

    fn canonical(&self) -> String {
        let n = self.normalize();
        if n.is_zero() {
            // normalize keeps the sign of -0
            "0".to_string()
        } else {
            n.to_string()
        }
    }
}

impl MeasureValue for f64 {
    fn parse_measure(text: &str, ty: NumericType) -> Option<Self> {
        let text = text.trim();
        match ty {
            NumericType::Integer => text.parse::<i64>().ok().map(|v| v as f64),
            NumericType::Decimal => Self::parse_number(text),
        }
    }

    fn parse_number(text: &str) -> Option<Self> {
        let d = Decimal::parse_number(text)?;
        d.to_f64()
    }

    fn from_count(n: usize) -> Self {
        n as f64
    }

    fn from_decimal(d: Decimal) -> Self {
        d.to_f64().unwrap_or(f64::NAN)
    }

    fn canonical(&self) -> String {
        if self.fract() == 0.0 && self.abs() < 1e15 {
            format!("{}", *self as i64)
        } else {
            match Decimal::from_f64(*self) {
                Some(d) => d.canonical(),
                None => format!("{self}"),
            }
        }
    }
}
