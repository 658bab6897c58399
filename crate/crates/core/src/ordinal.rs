//! Ordinal notations below ε₀ in Cantor normal form.
//!
//! An [`Ordinal`] is a list of `(exponent, coefficient)` terms with strictly
//! decreasing exponents, so structural equality coincides with ordinal
//! equality and comparison is lexicographic on terms.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::syntax::{Cursor, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("left subtraction underflow: {left} is larger than {right}")]
    Underflow { left: Ordinal, right: Ordinal },
    #[error("{0} is not a limit ordinal")]
    NotLimit(Ordinal),
    #[error("value would reach epsilon_0, which has no notation here")]
    NotationOverflow,
}

/// One summand `ω^exponent · coefficient`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: Ordinal,
    pub coefficient: BigUint,
}

/// An ordinal below ε₀ in Cantor normal form. The empty term list is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::from(1u64)
    }

    /// ω itself.
    pub fn omega() -> Self {
        Ordinal::omega_power(&Ordinal::one())
    }

    /// Builds an ordinal from raw terms, checking the normal-form invariants.
    pub fn from_terms(terms: Vec<Term>) -> Option<Self> {
        let ok_coeffs = terms.iter().all(|t| !t.coefficient.is_zero());
        let ok_order = terms.windows(2).all(|w| w[0].exponent > w[1].exponent);
        (ok_coeffs && ok_order).then_some(Ordinal { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff the ordinal is a natural number.
    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.is_zero())
    }

    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|t| !t.exponent.is_zero())
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|t| t.exponent.is_zero())
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent.is_zero() => t.coefficient.to_u64(),
            _ => None,
        }
    }

    /// Nesting depth of exponents: 0 for 0, 1 for positive naturals, 2 for
    /// ω-polynomials with finite exponents, and so on.
    pub fn tower_height(&self) -> usize {
        self.terms
            .iter()
            .map(|t| 1 + t.exponent.tower_height())
            .max()
            .unwrap_or(0)
    }

    pub fn leading_exponent(&self) -> Option<&Ordinal> {
        self.terms.first().map(|t| &t.exponent)
    }

    /// `ω^exponent` as a single term.
    pub fn omega_power(exponent: &Ordinal) -> Self {
        Ordinal {
            terms: vec![Term {
                exponent: exponent.clone(),
                coefficient: BigUint::one(),
            }],
        }
    }

    /// `ω^exponent · coefficient`; zero coefficient gives 0.
    pub fn monomial(exponent: Ordinal, coefficient: impl Into<BigUint>) -> Self {
        let coefficient = coefficient.into();
        if coefficient.is_zero() {
            return Ordinal::zero();
        }
        Ordinal {
            terms: vec![Term {
                exponent,
                coefficient,
            }],
        }
    }

    pub fn add(&self, other: &Ordinal) -> Ordinal {
        let Some(lead) = other.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .take_while(|t| t.exponent >= lead.exponent)
            .cloned()
            .collect();
        let mut rest = other.terms.iter();
        if let Some(last) = terms.last_mut() {
            if last.exponent == lead.exponent {
                last.coefficient += &lead.coefficient;
                rest.next();
            }
        }
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    /// The unique `η` with `self + η = x`.
    pub fn left_subtract(&self, x: &Ordinal) -> Result<Ordinal, OrdinalError> {
        if self > x {
            return Err(OrdinalError::Underflow {
                left: self.clone(),
                right: x.clone(),
            });
        }
        let diverge = self
            .terms
            .iter()
            .zip(&x.terms)
            .position(|(a, b)| a != b);
        let i = match diverge {
            Some(i) => i,
            // self is a prefix of x
            None => return Ok(Ordinal { terms: x.terms[self.terms.len()..].to_vec() }),
        };
        let (a, b) = (&self.terms[i], &x.terms[i]);
        let mut terms = Vec::with_capacity(x.terms.len() - i);
        if a.exponent == b.exponent {
            terms.push(Term {
                exponent: b.exponent.clone(),
                coefficient: &b.coefficient - &a.coefficient,
            });
        } else {
            terms.push(b.clone());
        }
        terms.extend(x.terms[i + 1..].iter().cloned());
        Ok(Ordinal { terms })
    }

    /// `self · n` for a natural number `n`.
    pub fn mul_nat(&self, n: &BigUint) -> Ordinal {
        if n.is_zero() || self.is_zero() {
            return Ordinal::zero();
        }
        // (ω^e·c + rest)·n = ω^e·(c·n) + rest
        let mut terms = self.terms.clone();
        terms[0].coefficient *= n;
        Ordinal { terms }
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// Predecessor of a successor ordinal.
    pub fn pred(&self) -> Option<Ordinal> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().unwrap();
        last.coefficient -= 1u32;
        if last.coefficient.is_zero() {
            terms.pop();
        }
        Some(Ordinal { terms })
    }

    /// One step of the hyperexponential: `α ↦ −1 + ω^α`.
    pub fn hyper_step(&self) -> Ordinal {
        if self.is_zero() {
            // −1 + ω^0 = −1 + 1 = 0
            Ordinal::zero()
        } else {
            Ordinal::omega_power(self)
        }
    }

    /// `e^k(self)`: the k-fold iterate of [`Ordinal::hyper_step`].
    pub fn hyper_e(&self, k: u64) -> Ordinal {
        let mut value = self.clone();
        for _ in 0..k {
            if value.is_zero() {
                break;
            }
            value = value.hyper_step();
        }
        value
    }

    /// Standard Cantor-normal-form fundamental sequence, `self[k]`.
    pub fn fundamental_sequence(&self, k: u64) -> Result<Ordinal, OrdinalError> {
        if !self.is_limit() {
            return Err(OrdinalError::NotLimit(self.clone()));
        }
        let mut prefix = self.terms.clone();
        let last = prefix.pop().unwrap();
        if last.coefficient > BigUint::one() {
            prefix.push(Term {
                exponent: last.exponent.clone(),
                coefficient: &last.coefficient - 1u32,
            });
        }
        let base = Ordinal { terms: prefix };
        let tail = match last.exponent.pred() {
            Some(e) => Ordinal::monomial(e, k),
            None => Ordinal::omega_power(&last.exponent.fundamental_sequence(k)?),
        };
        Ok(base.add(&tail))
    }

    pub(crate) fn parse_cursor(cur: &mut Cursor<'_>) -> Result<Ordinal, SyntaxError> {
        let mut acc = Ordinal::parse_product(cur)?;
        while cur.eat('+') {
            let rhs = Ordinal::parse_product(cur)?;
            acc = acc.add(&rhs);
        }
        Ok(acc)
    }

    fn parse_product(cur: &mut Cursor<'_>) -> Result<Ordinal, SyntaxError> {
        let mut acc = Ordinal::parse_power(cur)?;
        while cur.eat('*') {
            let n = cur.natural()?;
            acc = acc.mul_nat(&n);
        }
        Ok(acc)
    }

    fn parse_power(cur: &mut Cursor<'_>) -> Result<Ordinal, SyntaxError> {
        cur.skip_ws();
        if cur.eat('w') {
            if cur.eat('^') {
                // right associative: w^w^w = w^(w^w)
                let exp = Ordinal::parse_power(cur)?;
                return Ok(Ordinal::omega_power(&exp));
            }
            return Ok(Ordinal::omega());
        }
        if cur.eat('(') {
            let inner = Ordinal::parse_cursor(cur)?;
            cur.expect(')')?;
            return Ok(inner);
        }
        let n = cur.natural()?;
        Ok(Ordinal::monomial(Ordinal::zero(), n))
    }

    /// Parses the ASCII grammar: naturals, `w`, `w^x`, `x*n`, `x+y`, parentheses.
    pub fn parse(text: &str) -> Result<Ordinal, SyntaxError> {
        let mut cur = Cursor::new(text);
        let value = Ordinal::parse_cursor(&mut cur)?;
        cur.finish()?;
        Ok(value)
    }

    /// Display with `ω` and `·` instead of the ASCII forms.
    pub fn unicode(&self) -> String {
        self.to_string().replace('w', "ω").replace('*', "·")
    }

    fn fmt_exponent(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atomic = match self.terms.as_slice() {
            [t] => t.coefficient.is_one() || t.exponent.is_zero(),
            _ => false,
        };
        if atomic {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a
                .exponent
                .cmp(&b.exponent)
                .then_with(|| a.coefficient.cmp(&b.coefficient));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::monomial(Ordinal::zero(), n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coefficient)?;
                continue;
            }
            if t.exponent == Ordinal::one() {
                write!(f, "w")?;
            } else {
                write!(f, "w^")?;
                t.exponent.fmt_exponent(f)?;
            }
            if !t.coefficient.is_one() {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ordinal::parse(s)
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Ordinal::parse(&text).map_err(serde::de::Error::custom)
    }
}
