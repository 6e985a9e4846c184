//! Replication harness: paired comparisons of calibration schemes on seeded
//! synthetic data.

pub mod fig1;
pub mod simulate;
pub mod stats;
pub mod svg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibration::{CvScheme, WeightKind};
use crate::error::Error;

/// A calibrated estimator: a weight construction plus a CV scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Method {
    pub weights: WeightKind,
    pub cv: CvScheme,
}

impl Method {
    pub const LASSO: Method = Method {
        weights: WeightKind::Unit,
        cv: CvScheme::Simple,
    };

    pub fn new(weights: WeightKind, cv: CvScheme) -> Self {
        if weights == WeightKind::Unit {
            Self::LASSO
        } else {
            Self { weights, cv }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.weights == WeightKind::Unit {
            f.write_str("lasso")
        } else {
            write!(f, "{}/{}", self.weights.label(), self.cv.label())
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "lasso" {
            return Ok(Self::LASSO);
        }
        let (w, cv) = s.split_once('/').ok_or_else(|| {
            Error::InvalidArgument(format!(
                "method '{s}' must be 'lasso' or '<weights>/<simple|nested>'"
            ))
        })?;
        let weights = match w {
            "one-step" => WeightKind::LassoCv,
            "ridge-adaptive" => WeightKind::RidgeCv,
            "ols-adaptive" => WeightKind::Ols,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown weights '{other}' (one-step, ridge-adaptive, ols-adaptive)"
                )))
            }
        };
        let cv = match cv {
            "simple" => CvScheme::Simple,
            "nested" => CvScheme::Nested,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown CV scheme '{other}' (simple, nested)"
                )))
            }
        };
        Ok(Self { weights, cv })
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for s in [
            "lasso",
            "one-step/simple",
            "one-step/nested",
            "ridge-adaptive/nested",
            "ols-adaptive/simple",
        ] {
            let m: Method = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("one-step".parse::<Method>().is_err());
        assert!("two-step/simple".parse::<Method>().is_err());
        assert!("one-step/loo".parse::<Method>().is_err());
    }
}
