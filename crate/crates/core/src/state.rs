//! Break-point states and the toppling operator.
//!
//! A state is the finite set `H` of points over which the graph of a
//! tropical polynomial on `[0, 1]` breaks, together with multiplicities
//! (the slope drop at each break). The domain endpoints are implicit and
//! behave as infinite-multiplicity sinks. Toppling at a smooth point `p`
//! shrinks the break-free component `(a, b)` around `p`: both ends move
//! distance `c = min(p - a, b - p)` towards `p`.

use std::error::Error;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coord::Coord;

/// One break point: position and multiplicity (slope drop).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BreakPoint {
    pub pos: Coord,
    pub mult: u8,
}

/// The break-point set of a tropical polynomial on `[0, 1]`, strictly
/// sorted by position. The empty state is the zero series.
///
/// States produced by the dynamics always satisfy [`SandpileState::is_valid`]:
/// interior sorted positions, multiplicities in `{1, 2}` and an integral
/// weighted sum. [`SandpileState::from_points`] performs no checks so that
/// invalid candidates can be constructed and queried.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SandpileState {
    points: Vec<BreakPoint>,
}

/// Where a probe point sits relative to the break-point set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    /// The point is itself a break point; toppling there is the identity.
    OnHypersurface,
    /// The open break-free interval `(lo, hi)` containing the point;
    /// `lo`/`hi` may be the domain endpoints 0 and 1.
    Interval { lo: Coord, hi: Coord },
}

/// Probe point on the domain boundary, where components are undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryPoint(pub Coord);

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "point {} lies on the domain boundary", self.0)
    }
}

impl Error for BoundaryPoint {}

/// The weighted break-point sum is not an integer, so no tropical
/// polynomial on `[0, 1]` realizes the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonIntegralState;

impl fmt::Display for NonIntegralState {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "state violates the integrality criterion")
    }
}

impl Error for NonIntegralState {}

impl SandpileState {
    /// The initial state: no break points, the zero series.
    pub fn new() -> SandpileState {
        SandpileState { points: Vec::new() }
    }

    /// Builds a state from `(position, multiplicity)` pairs as given,
    /// without validation; use [`SandpileState::is_valid`] to query.
    pub fn from_points(points: impl IntoIterator<Item = (Coord, u8)>) -> SandpileState {
        SandpileState {
            points: points
                .into_iter()
                .map(|(pos, mult)| BreakPoint { pos, mult })
                .collect(),
        }
    }

    pub fn points(&self) -> &[BreakPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of break points counted with multiplicity.
    pub fn total_multiplicity(&self) -> u64 {
        self.points.iter().map(|bp| bp.mult as u64).sum()
    }

    /// The break-free component around `p`, or [`Component::OnHypersurface`]
    /// if `p` is a break point. Boundary probes are rejected.
    pub fn find_component(&self, p: Coord) -> Result<Component, BoundaryPoint> {
        if !p.is_interior() {
            return Err(BoundaryPoint(p));
        }
        match self.points.binary_search_by(|bp| bp.pos.cmp(&p)) {
            Ok(_) => Ok(Component::OnHypersurface),
            Err(i) => {
                let lo = if i == 0 {
                    Coord::zero(p.den())
                } else {
                    self.points[i - 1].pos
                };
                let hi = if i == self.points.len() {
                    Coord::one(p.den())
                } else {
                    self.points[i].pos
                };
                Ok(Component::Interval { lo, hi })
            }
        }
    }

    /// Topples at `p` in place; returns whether the state changed.
    ///
    /// `p` must be interior and on the same grid as the state. With
    /// component `(a, b)` and `c = min(p - a, b - p)`, the interior ends
    /// lose one multiplicity (vanishing points are dropped) and `a + c`,
    /// `b - c` gain one each, merging into a double point when `2p = a + b`.
    pub fn topple_in_place(&mut self, p: Coord) -> bool {
        assert!(p.is_interior(), "toppling point must lie in (0, 1)");
        debug_assert!(
            self.points.iter().all(|bp| bp.pos.den() == p.den()),
            "toppling point is on a different grid than the state"
        );
        let mut i = match self.points.binary_search_by(|bp| bp.pos.cmp(&p)) {
            Ok(_) => return false,
            Err(i) => i,
        };
        let den = p.den();
        let lo = if i == 0 { 0 } else { self.points[i - 1].pos.num() };
        let hi = if i == self.points.len() {
            den
        } else {
            self.points[i].pos.num()
        };
        let c = (p.num() - lo).min(hi - p.num());
        debug_assert!(c > 0);

        if i > 0 {
            // Interior left end loses one multiplicity.
            let left = &mut self.points[i - 1];
            if left.mult > 1 {
                left.mult -= 1;
            } else {
                self.points.remove(i - 1);
                i -= 1;
            }
        }
        if i < self.points.len() && hi < den {
            let right = &mut self.points[i];
            if right.mult > 1 {
                right.mult -= 1;
            } else {
                self.points.remove(i);
            }
        }

        let new_lo = lo + c;
        let new_hi = hi - c;
        if new_lo == new_hi {
            self.points.insert(
                i,
                BreakPoint {
                    pos: Coord::new(new_lo, den),
                    mult: 2,
                },
            );
        } else {
            self.points.insert(
                i,
                BreakPoint {
                    pos: Coord::new(new_hi, den),
                    mult: 1,
                },
            );
            self.points.insert(
                i,
                BreakPoint {
                    pos: Coord::new(new_lo, den),
                    mult: 1,
                },
            );
        }
        debug_assert!(self.points.iter().all(|bp| bp.mult <= 2));
        true
    }

    /// Pure form of [`SandpileState::topple_in_place`].
    pub fn topple(&self, p: Coord) -> SandpileState {
        let mut next = self.clone();
        next.topple_in_place(p);
        next
    }

    /// Evaluates the tropical polynomial determined by the state:
    /// `F(x) = alpha * x + sum mult(h) * min(0, h - x)` with
    /// `alpha = sum mult(h) * (1 - h)`.
    pub fn evaluate(&self, x: Coord) -> BigRational {
        let x = x.to_big_rational();
        let one = BigRational::one();
        let mut alpha = BigRational::zero();
        let mut kinks = BigRational::zero();
        for bp in &self.points {
            let h = bp.pos.to_big_rational();
            let mult = BigRational::from(BigInt::from(bp.mult));
            alpha += &mult * (&one - &h);
            let gap = &h - &x;
            if gap < BigRational::zero() {
                kinks += &mult * gap;
            }
        }
        alpha * x + kinks
    }

    /// Integrality criterion plus structural checks: a state is realized by
    /// a tropical polynomial on `[0, 1]` iff the weighted position sum is an
    /// integer; positions must be interior, strictly sorted on one grid, and
    /// multiplicities in `{1, 2}`.
    pub fn is_valid(&self) -> bool {
        let Some(first) = self.points.first() else {
            return true;
        };
        let den = first.pos.den();
        let mut weighted_sum: u128 = 0;
        for (k, bp) in self.points.iter().enumerate() {
            if bp.pos.den() != den || !bp.pos.is_interior() {
                return false;
            }
            if !(1..=2).contains(&bp.mult) {
                return false;
            }
            if k > 0 && self.points[k - 1].pos >= bp.pos {
                return false;
            }
            weighted_sum += bp.mult as u128 * bp.pos.num() as u128;
        }
        weighted_sum % den as u128 == 0
    }

    /// Slopes of the polynomial at the two domain endpoints; their
    /// difference is the total multiplicity.
    pub fn boundary_slopes(&self) -> Result<(i64, i64), NonIntegralState> {
        let Some(first) = self.points.first() else {
            return Ok((0, 0));
        };
        let den = first.pos.den() as u128;
        let mut weighted_sum: u128 = 0;
        let mut total_mult: u128 = 0;
        for bp in &self.points {
            if bp.pos.den() as u128 != den {
                return Err(NonIntegralState);
            }
            weighted_sum += bp.mult as u128 * bp.pos.num() as u128;
            total_mult += bp.mult as u128;
        }
        // alpha = sum mult*(1 - h) = total_mult - weighted_sum/den.
        if weighted_sum % den != 0 {
            return Err(NonIntegralState);
        }
        let alpha = total_mult as i64 - (weighted_sum / den) as i64;
        Ok((alpha, alpha - total_mult as i64))
    }
}

impl fmt::Display for SandpileState {
    /// `{2/9, 3/9, 4/9}` with `x2` marking double points; `{}` when empty.
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{{")?;
        for (k, bp) in self.points.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", bp.pos)?;
            if bp.mult != 1 {
                write!(f, " x{}", bp.mult)?;
            }
        }
        write!(f, "}}")
    }
}
