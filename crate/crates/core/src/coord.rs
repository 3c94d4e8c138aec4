//! Exact coordinates on the unit interval.
//!
//! A [`Coord`] is an integer numerator over a fixed denominator shared by
//! every coordinate of a run. The dynamics only ever add, subtract, take
//! minima and compare numerators, so no rounding can occur anywhere.

use std::cmp::Ordering;
use std::error::Error;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};

/// An exact point of `[0, 1]`, stored as `num / den`.
///
/// Comparisons are exact across denominators (cross-multiplication in
/// 128 bits), so `1/2 == 2/4`. Arithmetic is only defined between
/// coordinates on the same grid; mixing grids is a caller bug.
#[derive(Clone, Copy, Debug)]
pub struct Coord {
    num: u64,
    den: u64,
}

impl Coord {
    /// A coordinate `num / den`. Panics unless `den >= 1` and `num <= den`.
    pub fn new(num: u64, den: u64) -> Coord {
        assert!(den >= 1, "denominator must be positive");
        assert!(num <= den, "coordinate {}/{} lies outside [0, 1]", num, den);
        Coord { num, den }
    }

    /// The left endpoint of the domain on the given grid.
    pub fn zero(den: u64) -> Coord {
        Coord::new(0, den)
    }

    /// The right endpoint of the domain on the given grid.
    pub fn one(den: u64) -> Coord {
        Coord::new(den, den)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// True when the point lies strictly inside `(0, 1)`.
    pub fn is_interior(&self) -> bool {
        0 < self.num && self.num < self.den
    }

    /// The reflection `1 - self`, exact on the same grid.
    pub fn mirror(&self) -> Coord {
        Coord::new(self.den - self.num, self.den)
    }

    /// Exact rescale to another denominator; `None` if the point is not
    /// representable there.
    pub fn rescale(&self, new_den: u64) -> Option<Coord> {
        let scaled = self.num as u128 * new_den as u128;
        if scaled % self.den as u128 != 0 {
            return None;
        }
        Some(Coord::new((scaled / self.den as u128) as u64, new_den))
    }

    /// Reduce the fraction by the gcd of numerator and denominator.
    pub fn reduced(&self) -> Coord {
        let g = self.num.gcd(&self.den);
        if g <= 1 {
            *self
        } else {
            Coord::new(self.num / g, self.den / g)
        }
    }

    pub fn to_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.num, self.den)
    }

    pub fn to_big_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Coord {
    fn eq(&self, other: &Coord) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        self.num as u128 * other.den as u128 == other.num as u128 * self.den as u128
    }
}

impl Eq for Coord {}

impl PartialOrd for Coord {
    fn partial_cmp(&self, other: &Coord) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Coord {
    fn cmp(&self, other: &Coord) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Coord {
    /// Prints the stored numerator and denominator without reducing, so
    /// that output echoes the grid a run actually used.
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else if self.num == self.den {
            write!(f, "1")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Round an exact rational `num / den` to the nearest point of the grid
/// with denominator `target_den` (ties round up).
pub fn snap(num: u128, den: u128, target_den: u64) -> Coord {
    assert!(den > 0 && num <= den, "can only snap values inside [0, 1]");
    let scaled = 2 * num * target_den as u128 + den;
    Coord::new((scaled / (2 * den)) as u64, target_den)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseCoordError {
    Empty,
    Malformed(String),
    OutOfRange(String),
    /// More fractional digits or a larger denominator than a u64 grid can hold.
    Unrepresentable(String),
}

impl fmt::Display for ParseCoordError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            ParseCoordError::Empty => write!(f, "empty coordinate"),
            ParseCoordError::Malformed(s) => {
                write!(f, "cannot parse {:?} as a fraction a/b or a decimal", s)
            }
            ParseCoordError::OutOfRange(s) => write!(f, "coordinate {:?} lies outside [0, 1]", s),
            ParseCoordError::Unrepresentable(s) => {
                write!(f, "coordinate {:?} does not fit a 64-bit exact grid", s)
            }
        }
    }
}

impl Error for ParseCoordError {}

impl FromStr for Coord {
    type Err = ParseCoordError;

    /// Accepts `a/b` fractions, plain integers and finite decimals, all
    /// parsed exactly and reduced; the value must lie in `[0, 1]`.
    fn from_str(s: &str) -> Result<Coord, ParseCoordError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseCoordError::Empty);
        }
        let malformed = || ParseCoordError::Malformed(s.to_string());
        if let Some((a, b)) = s.split_once('/') {
            let num: u64 = a.trim().parse().map_err(|_| malformed())?;
            let den: u64 = b.trim().parse().map_err(|_| malformed())?;
            if den == 0 {
                return Err(malformed());
            }
            if num > den {
                return Err(ParseCoordError::OutOfRange(s.to_string()));
            }
            return Ok(Coord::new(num, den).reduced());
        }
        if let Some((int, frac)) = s.split_once('.') {
            let int_part: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| malformed())?
            };
            if frac.is_empty() {
                return parse_integer(int_part, s);
            }
            if !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            if frac.len() > 19 {
                return Err(ParseCoordError::Unrepresentable(s.to_string()));
            }
            let den = 10u64
                .checked_pow(frac.len() as u32)
                .ok_or_else(|| ParseCoordError::Unrepresentable(s.to_string()))?;
            let frac_num: u64 = frac.parse().map_err(|_| malformed())?;
            let num = int_part
                .checked_mul(den)
                .and_then(|v| v.checked_add(frac_num))
                .ok_or_else(|| ParseCoordError::OutOfRange(s.to_string()))?;
            if num > den {
                return Err(ParseCoordError::OutOfRange(s.to_string()));
            }
            return Ok(Coord::new(num, den).reduced());
        }
        let int_part: u64 = s.parse().map_err(|_| malformed())?;
        parse_integer(int_part, s)
    }
}

fn parse_integer(v: u64, original: &str) -> Result<Coord, ParseCoordError> {
    match v {
        0 => Ok(Coord::new(0, 1)),
        1 => Ok(Coord::new(1, 1)),
        _ => Err(ParseCoordError::OutOfRange(original.to_string())),
    }
}
