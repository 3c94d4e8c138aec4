//! Configurations of grain points and the closed-form limit state.
//!
//! The limit of a relaxation is characterized directly by the fractional
//! part `q` of minus the coordinate sum: the limit break points are the
//! grain points themselves, joined by `q` (or doubling a grain that
//! coincides with `q`). This construction is kept independent of the
//! sweep-based relaxation so the two can cross-validate each other.

use std::error::Error;
use std::fmt;

use num_integer::Integer;

use crate::coord::Coord;
use crate::state::SandpileState;

/// An ordered tuple of distinct interior grain points on one grid.
///
/// Order matters: the relaxation applies the toppling operator in tuple
/// order within each sweep, and the sweep count is sensitive to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConfig {
    pts: Vec<Coord>,
    den: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigError {
    Empty,
    Boundary(Coord),
    Duplicate(Coord),
    /// No common u64 grid holds all the given denominators.
    DenominatorOverflow,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            ConfigError::Empty => write!(f, "configuration needs at least one point"),
            ConfigError::Boundary(p) => {
                write!(f, "point {} must lie strictly inside (0, 1)", p)
            }
            ConfigError::Duplicate(p) => write!(f, "duplicate point {}", p),
            ConfigError::DenominatorOverflow => {
                write!(f, "common denominator of the points exceeds 64 bits")
            }
        }
    }
}

impl Error for ConfigError {}

/// Which of the three limit-state cases a configuration falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitCase {
    /// The coordinate sum is an integer (`q = 0`): the grain points alone.
    IntegralSum,
    /// `q` coincides with the grain point at this tuple index, which
    /// carries multiplicity 2 in the limit.
    OnGrainPoint(usize),
    /// Generic case: `q` joins the grain points as a new break point.
    NewBreakPoint(Coord),
}

impl PointConfig {
    /// Validates and normalizes a tuple of points: all are rescaled to
    /// their least common denominator, must be interior and pairwise
    /// distinct, and at least one point is required.
    pub fn new(pts: Vec<Coord>) -> Result<PointConfig, ConfigError> {
        if pts.is_empty() {
            return Err(ConfigError::Empty);
        }
        let mut den: u64 = 1;
        for p in &pts {
            let d = p.reduced().den();
            den = match den.checked_mul(d / den.gcd(&d)) {
                Some(l) => l,
                None => return Err(ConfigError::DenominatorOverflow),
            };
        }
        let mut rescaled = Vec::with_capacity(pts.len());
        for p in &pts {
            let p = p.rescale(den).expect("lcm denominator is exact");
            if !p.is_interior() {
                return Err(ConfigError::Boundary(p));
            }
            rescaled.push(p);
        }
        let mut sorted: Vec<u64> = rescaled.iter().map(Coord::num).collect();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(ConfigError::Duplicate(Coord::new(w[0], den)));
            }
        }
        Ok(PointConfig { pts: rescaled, den })
    }

    pub fn points(&self) -> &[Coord] {
        &self.pts
    }

    pub fn n(&self) -> usize {
        self.pts.len()
    }

    /// Common denominator of the configuration's grid.
    pub fn den(&self) -> u64 {
        self.den
    }

    /// The fractional part of minus the coordinate sum, in `[0, 1)`.
    pub fn fractional_q(&self) -> Coord {
        let den = self.den as u128;
        let sum: u128 = self.pts.iter().map(|p| p.num() as u128).sum();
        let q = (den - sum % den) % den;
        Coord::new(q as u64, self.den)
    }

    /// Which limit-state case applies, decided by the position of `q`.
    pub fn limit_case(&self) -> LimitCase {
        let q = self.fractional_q();
        if q.num() == 0 {
            return LimitCase::IntegralSum;
        }
        match self.pts.iter().position(|p| *p == q) {
            Some(j) => LimitCase::OnGrainPoint(j),
            None => LimitCase::NewBreakPoint(q),
        }
    }

    /// The limit state of any fair relaxation of this configuration,
    /// built directly from the case analysis (no sweeps performed).
    pub fn limit_state(&self) -> SandpileState {
        let mut nums: Vec<u64> = self.pts.iter().map(Coord::num).collect();
        let case = self.limit_case();
        if let LimitCase::NewBreakPoint(q) = case {
            nums.push(q.num());
        }
        nums.sort_unstable();
        let double = match case {
            LimitCase::OnGrainPoint(j) => Some(self.pts[j].num()),
            _ => None,
        };
        SandpileState::from_points(nums.into_iter().map(|num| {
            let mult = if Some(num) == double { 2 } else { 1 };
            (Coord::new(num, self.den), mult)
        }))
    }
}

impl fmt::Display for PointConfig {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.pts.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", p)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(points: &[(u64, u64)]) -> PointConfig {
        PointConfig::new(points.iter().map(|&(n, d)| Coord::new(n, d)).collect()).unwrap()
    }

    #[test]
    fn construction_normalizes_to_common_denominator() {
        let c = cfg(&[(1, 3), (1, 2)]);
        assert_eq!(c.den(), 6);
        assert_eq!(c.points(), &[Coord::new(2, 6), Coord::new(3, 6)]);
    }

    #[test]
    fn construction_rejects_bad_tuples() {
        assert!(matches!(PointConfig::new(vec![]), Err(ConfigError::Empty)));
        assert!(matches!(
            PointConfig::new(vec![Coord::new(0, 2), Coord::new(1, 2)]),
            Err(ConfigError::Boundary(_))
        ));
        assert!(matches!(
            PointConfig::new(vec![Coord::new(1, 2), Coord::new(2, 4)]),
            Err(ConfigError::Duplicate(_))
        ));
    }

    #[test]
    fn fractional_q_examples() {
        assert_eq!(cfg(&[(4, 9), (3, 9)]).fractional_q(), Coord::new(2, 9));
        assert_eq!(cfg(&[(1, 4), (3, 4)]).fractional_q(), Coord::new(0, 4));
        assert_eq!(cfg(&[(1, 3)]).fractional_q(), Coord::new(2, 3));
    }

    #[test]
    fn limit_state_integral_sum_case() {
        let c = cfg(&[(1, 4), (3, 4)]);
        assert_eq!(c.limit_case(), LimitCase::IntegralSum);
        let limit = c.limit_state();
        assert_eq!(
            limit,
            SandpileState::from_points(vec![(Coord::new(1, 4), 1), (Coord::new(3, 4), 1)])
        );
        assert_eq!(limit.total_multiplicity(), 2);
    }

    #[test]
    fn limit_state_generic_case() {
        let c = cfg(&[(4, 9), (3, 9)]);
        assert_eq!(c.limit_case(), LimitCase::NewBreakPoint(Coord::new(2, 9)));
        assert_eq!(
            c.limit_state(),
            SandpileState::from_points(vec![
                (Coord::new(2, 9), 1),
                (Coord::new(3, 9), 1),
                (Coord::new(4, 9), 1),
            ])
        );
    }

    #[test]
    fn limit_state_double_point_case() {
        let c = cfg(&[(1, 2)]);
        assert_eq!(c.limit_case(), LimitCase::OnGrainPoint(0));
        assert_eq!(
            c.limit_state(),
            SandpileState::from_points(vec![(Coord::new(1, 2), 2)])
        );
        assert_eq!(c.limit_state().total_multiplicity(), 2);
    }

    #[test]
    fn limit_state_is_always_valid() {
        for c in [
            cfg(&[(1, 4), (3, 4)]),
            cfg(&[(4, 9), (3, 9)]),
            cfg(&[(1, 2)]),
            cfg(&[(1, 7), (2, 7), (4, 7)]),
        ] {
            assert!(c.limit_state().is_valid(), "invalid limit for {}", c);
        }
    }
}
