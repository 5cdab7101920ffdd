//! Hardy, BMO, `L_pMO` and maximal norms.

mod bmo;
mod hardy;
mod maximal;

use serde::{Deserialize, Serialize};

pub use bmo::{bmo_col_norm, bmo_col_norm_of, bmo_norm, bmo_row_norm, bmo_row_norm_of, gram_sums, lpmo_col_norm, lpmo_col_norm_of, lpmo_sequence, mean_osc_bmo_norm};
pub use hardy::{hardy_col_norm, hardy_col_norm_of, hardy_norm, hardy_norm_of, hardy_norm_with, hardy_row_norm, hardy_row_norm_of, HardyOptions};
pub use maximal::{maximal_norm, maximal_norm_with, MaximalOptions, MaximalSequence};

use crate::error::{Error, Result};

/// Certified bounds `lower ≤ ‖·‖ ≤ upper` with the method that produced each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub method_lower: String,
    pub method_upper: String,
}

impl NormBracket {
    pub fn new(lower: f64, upper: f64, method_lower: impl Into<String>, method_upper: impl Into<String>) -> Result<Self> {
        if !(lower >= 0.0 && lower <= upper * (1.0 + 1e-9)) || !upper.is_finite() {
            return Err(Error::InvalidInput(format!("inconsistent bracket [{lower:e}, {upper:e}]")));
        }
        // Rounding can leave the certified lower end a few ulps above the upper.
        let lower = lower.min(upper);
        Ok(NormBracket { lower, upper, method_lower: method_lower.into(), method_upper: method_upper.into() })
    }

    pub fn exact(value: f64, method: impl Into<String>) -> Self {
        let m = method.into();
        NormBracket { lower: value, upper: value, method_lower: m.clone(), method_upper: m }
    }

    /// `(upper − lower) / upper`, zero for the zero bracket.
    pub fn relative_width(&self) -> f64 {
        if self.upper == 0.0 {
            0.0
        } else {
            (self.upper - self.lower) / self.upper
        }
    }

    pub fn contains(&self, value: f64, rel_tol: f64) -> bool {
        value >= self.lower * (1.0 - rel_tol) && value <= self.upper * (1.0 + rel_tol)
    }

    /// Applies an increasing map to both ends.
    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> Self {
        NormBracket { lower: f(self.lower), upper: f(self.upper), ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        crate::json::to_json_string(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_invariant() {
        assert!(NormBracket::new(1.0, 2.0, "a", "b").is_ok());
        assert!(NormBracket::new(2.0, 1.0, "a", "b").is_err());
        assert!(NormBracket::new(-1.0, 1.0, "a", "b").is_err());
        let b = NormBracket::new(1.0 + 1e-15, 1.0, "a", "b").unwrap();
        assert!(b.lower <= b.upper);
        assert_eq!(NormBracket::exact(0.0, "x").relative_width(), 0.0);
        let t = NormBracket::new(0.5, 1.0, "lo", "hi").unwrap().to_json();
        assert_eq!(t, r#"{"lower":5.0000000000000000e-1,"upper":1.0000000000000000e0,"method_lower":"lo","method_upper":"hi"}"#);
    }
}
