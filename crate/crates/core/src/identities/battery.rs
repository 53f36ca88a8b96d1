//! The fixed set of test statistics applied to a two-component path.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::path::{Path, PathError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// first(t)
    FirstTerminal,
    /// first(t/2)
    FirstMid,
    /// max of first
    FirstMax,
    /// (1/t)∫ first
    FirstMean,
    /// second(t/2)
    SecondMid,
    /// max of second
    SecondMax,
    /// min of second
    SecondMin,
    /// second(t/4) + 2·second(3t/4)
    SecondQuarterMix,
}

impl Functional {
    pub const ALL: [Functional; 8] = [
        Functional::FirstTerminal,
        Functional::FirstMid,
        Functional::FirstMax,
        Functional::FirstMean,
        Functional::SecondMid,
        Functional::SecondMax,
        Functional::SecondMin,
        Functional::SecondQuarterMix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Functional::FirstTerminal => "first_terminal",
            Functional::FirstMid => "first_mid",
            Functional::FirstMax => "first_max",
            Functional::FirstMean => "first_mean",
            Functional::SecondMid => "second_mid",
            Functional::SecondMax => "second_max",
            Functional::SecondMin => "second_min",
            Functional::SecondQuarterMix => "second_quarter_mix",
        }
    }

    /// Position in the battery, 1-based (`f1` … `f8`).
    pub fn index(self) -> usize {
        Functional::ALL.iter().position(|&f| f == self).expect("listed") + 1
    }

    /// Assumes both paths share the horizon.
    pub fn eval(self, first: &Path, second: &Path) -> f64 {
        let t = first.horizon();
        match self {
            Functional::FirstTerminal => first.terminal(),
            Functional::FirstMid => first.eval_unchecked(0.5 * t),
            Functional::FirstMax => first.max_value(),
            Functional::FirstMean => first.integral() / t,
            Functional::SecondMid => second.eval_unchecked(0.5 * t),
            Functional::SecondMax => second.max_value(),
            Functional::SecondMin => second.min_value(),
            Functional::SecondQuarterMix => second.eval_unchecked(0.25 * t) + 2.0 * second.eval_unchecked(0.75 * t),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Functional {
    type Err = String;

    /// Accepts the long name or the `f1`…`f8` shorthand.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Functional::ALL
            .into_iter()
            .find(|f| f.name() == s || format!("f{}", f.index()) == s)
            .ok_or_else(|| format!("unknown functional {s:?}"))
    }
}

/// Evaluates `functionals` in order on `(first, second)`.
pub fn evaluate(functionals: &[Functional], first: &Path, second: &Path) -> Result<Vec<f64>, PathError> {
    if (first.horizon() - second.horizon()).abs() > first.time_tol() {
        return Err(PathError::HorizonMismatch(first.horizon(), second.horizon()));
    }
    Ok(functionals.iter().map(|f| f.eval(first, second)).collect())
}

/// The full battery `f1 … f8`.
pub fn functional_battery(first: &Path, second: &Path) -> Result<Vec<f64>, PathError> {
    evaluate(&Functional::ALL, first, second)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_paths() {
        let z = Path::constant(1.0, 0.0).unwrap();
        assert_eq!(functional_battery(&z, &z).unwrap(), vec![0.0; 8]);
    }

    #[test]
    fn line_and_zero() {
        let line = Path::uniform(1.0, vec![0.0, 1.0]).unwrap();
        let z = Path::constant(1.0, 0.0).unwrap();
        assert_eq!(functional_battery(&line, &z).unwrap(), vec![1.0, 0.5, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn order_is_fixed() {
        let names: Vec<_> = Functional::ALL.iter().map(|f| f.name()).collect();
        assert_eq!(
            names,
            [
                "first_terminal",
                "first_mid",
                "first_max",
                "first_mean",
                "second_mid",
                "second_max",
                "second_min",
                "second_quarter_mix"
            ]
        );
        assert_eq!("f3".parse::<Functional>().unwrap(), Functional::FirstMax);
        assert_eq!("second_min".parse::<Functional>().unwrap(), Functional::SecondMin);
        assert!("f9".parse::<Functional>().is_err());
    }

    #[test]
    fn second_component_functionals() {
        let first = Path::constant(4.0, 0.0).unwrap();
        let second = Path::uniform(4.0, vec![0.0, 1.0, -2.0, 3.0, 0.5]).unwrap();
        let b = functional_battery(&first, &second).unwrap();
        assert_eq!(b[4], -2.0);
        assert_eq!(b[5], 3.0);
        assert_eq!(b[6], -2.0);
        assert_eq!(b[7], 1.0 + 2.0 * 3.0);
    }

    #[test]
    fn horizon_mismatch() {
        let a = Path::constant(1.0, 0.0).unwrap();
        let b = Path::constant(2.0, 0.0).unwrap();
        assert!(functional_battery(&a, &b).is_err());
    }
}
