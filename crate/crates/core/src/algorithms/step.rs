use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `gamma_k = gamma0` or `gamma_k = gamma0 / (1 + k)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase", deny_unknown_fields)]
pub enum StepSizeRule {
    Constant { gamma0: f64 },
    Decreasing { gamma0: f64, exponent: f64 },
}

impl StepSizeRule {
    pub fn constant(gamma0: f64) -> Result<Self> {
        let rule = Self::Constant { gamma0 };
        rule.validate()?;
        Ok(rule)
    }

    pub fn decreasing(gamma0: f64, exponent: f64) -> Result<Self> {
        let rule = Self::Decreasing { gamma0, exponent };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.gamma0();
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma0 must be positive, got {g}")));
        }
        if let Self::Decreasing { exponent, .. } = self {
            if !(*exponent >= 0.0 && exponent.is_finite()) {
                return Err(Error::InvalidArgument(format!("decay exponent must be >= 0, got {exponent}")));
            }
        }
        Ok(())
    }

    pub fn gamma0(&self) -> f64 {
        match *self {
            Self::Constant { gamma0 } | Self::Decreasing { gamma0, .. } => gamma0,
        }
    }

    pub fn step(&self, k: u64) -> f64 {
        match *self {
            Self::Constant { gamma0 } => gamma0,
            Self::Decreasing { gamma0, exponent } => {
                if exponent == 0.0 {
                    gamma0
                } else {
                    gamma0 / (1.0 + k as f64).powf(exponent)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let c = StepSizeRule::constant(0.1).unwrap();
        assert!([0, 1, 17, 1_000_000].iter().all(|&k| c.step(k) == 0.1));
        assert_eq!(StepSizeRule::decreasing(1.0, 1.0).unwrap().step(9), 0.1);
        let flat = StepSizeRule::decreasing(0.3, 0.0).unwrap();
        assert!((0..50).all(|k| flat.step(k) == 0.3));
        assert_eq!(StepSizeRule::decreasing(2.0, 0.5).unwrap().step(3), 1.0);
    }

    #[test]
    fn invalid_rules() {
        assert!(StepSizeRule::constant(0.0).is_err());
        assert!(StepSizeRule::constant(-1.0).is_err());
        assert!(StepSizeRule::constant(f64::NAN).is_err());
        assert!(StepSizeRule::decreasing(1.0, -0.5).is_err());
    }

    #[test]
    fn steps_stay_positive() {
        let r = StepSizeRule::decreasing(1e-3, 2.0).unwrap();
        assert!((0..100_000).step_by(997).all(|k| r.step(k) > 0.0));
    }
}
