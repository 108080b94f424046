//! Exact rational numbers used for every length, time and ratio.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

/// Exact rational in lowest terms with a positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(Ratio<i128>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("number `{0}` out of range")]
    Overflow(String),
}

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Builds `n/d`, reducing to lowest terms. Panics when `d == 0`.
    pub fn new(n: i128, d: i128) -> Self {
        Rational(Ratio::new(n, d))
    }

    pub fn integer(n: i128) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    /// Lossy conversion for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// Least common multiple of the denominators of `values`.
    pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i128 {
        values.into_iter().fold(1i128, |acc, r| acc.lcm(&r.denom()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str, whole: &str) -> Result<i128, ParseRationalError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Malformed(whole.to_string()));
    }
    s.parse::<i128>()
        .map_err(|_| ParseRationalError::Overflow(whole.to_string()))
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `7`, `-3`, `5/4`, `0.25` and `-1.5`.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s = input.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let value = if let Some((n, d)) = body.split_once('/') {
            let n = parse_int(n.trim(), s)?;
            let d = parse_int(d.trim(), s)?;
            if d == 0 {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            Rational::new(n, d)
        } else if let Some((int, frac)) = body.split_once('.') {
            let int = if int.is_empty() { 0 } else { parse_int(int, s)? };
            let scale = 10i128
                .checked_pow(frac.len() as u32)
                .ok_or_else(|| ParseRationalError::Overflow(s.to_string()))?;
            let frac = parse_int(frac, s)?;
            let n = int
                .checked_mul(scale)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(|| ParseRationalError::Overflow(s.to_string()))?;
            Rational::new(n, scale)
        } else {
            Rational::integer(parse_int(body, s)?)
        };
        Ok(if negative { -value } else { value })
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n as i128)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::integer(n as i128)
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational::integer(n as i128)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + *b)
    }
}

/// Shorthand for `Rational::new(n, d)`.
pub fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_notations() {
        assert_eq!("7".parse::<Rational>().unwrap(), q(7, 1));
        assert_eq!("10/4".parse::<Rational>().unwrap(), q(5, 2));
        assert_eq!("0.25".parse::<Rational>().unwrap(), q(1, 4));
        assert_eq!("-1.5".parse::<Rational>().unwrap(), q(-3, 2));
        assert_eq!(".5".parse::<Rational>().unwrap(), q(1, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("1.".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for r in [q(3, 2), q(-7, 3), q(4, 1), Rational::ZERO] {
            assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
        }
        assert_eq!(q(6, 4).to_string(), "3/2");
        assert_eq!(q(8, 4).to_string(), "2");
    }

    #[test]
    fn arithmetic_is_exact() {
        let third = q(1, 3);
        assert_eq!(third + third + third, Rational::ONE);
        assert_eq!(q(3, 2) / q(2, 1), q(3, 4));
        assert_eq!(q(1, 2).max(q(2, 3)), q(2, 3));
        assert_eq!(Rational::common_denominator(&[q(1, 4), q(1, 6)]), 12);
    }
}
