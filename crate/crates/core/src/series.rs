//! Integer polynomials in `t`, rational functions, and their power series.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Polynomial with integer coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<BigInt>);

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    pub fn t() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(BigInt::one()), |acc, _| acc.mul(self))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c < &BigInt::zero() { "-" } else { "+" };
            let a = if c < &BigInt::zero() { -c } else { c.clone() };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => f.write_str("t")?,
                (1, false) => write!(f, "{a}t")?,
                (_, true) => write!(f, "t^{i}")?,
                (_, false) => write!(f, "{a}t^{i}")?,
            }
        }
        Ok(())
    }
}

/// Power-series coefficients of `numer / denom` up to `t^dmax`.
pub fn expand_rational(numer: &Poly, denom: &Poly, dmax: usize) -> Result<Vec<Rational>> {
    let d0 = denom.coeff(0);
    if d0.is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    let d0 = Rational::from_integer(d0);
    let mut out: Vec<Rational> = Vec::with_capacity(dmax + 1);
    for k in 0..=dmax {
        let mut acc = Rational::from_integer(numer.coeff(k));
        for i in 1..=k.min(denom.0.len().saturating_sub(1)) {
            acc -= Rational::from_integer(denom.coeff(i)) * &out[k - i];
        }
        out.push(acc / &d0);
    }
    Ok(out)
}

/// A quotient of two integer polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub numer: Poly,
    pub denom: Poly,
}

impl RationalFunction {
    pub fn expand(&self, dmax: usize) -> Result<Vec<Rational>> {
        expand_rational(&self.numer, &self.denom, dmax)
    }

    fn from_poly(p: Poly) -> Self {
        Self { numer: p, denom: Poly::constant(BigInt::one()) }
    }

    fn add(&self, o: &Self) -> Self {
        Self { numer: self.numer.mul(&o.denom).add(&o.numer.mul(&self.denom)), denom: self.denom.mul(&o.denom) }
    }

    fn mul(&self, o: &Self) -> Self {
        Self { numer: self.numer.mul(&o.numer), denom: self.denom.mul(&o.denom) }
    }

    fn div(&self, o: &Self) -> Result<Self> {
        if o.numer.is_zero() {
            return Err(Error::Parse("division by zero".into()));
        }
        Ok(Self { numer: self.numer.mul(&o.denom), denom: self.denom.mul(&o.numer) })
    }

    fn neg(&self) -> Self {
        Self { numer: self.numer.neg(), denom: self.denom.clone() }
    }

    fn pow(&self, e: u32) -> Self {
        Self { numer: self.numer.pow(e), denom: self.denom.pow(e) }
    }
}

impl std::str::FromStr for RationalFunction {
    type Err = Error;

    /// Parse expressions in `t` such as `(1-t)^3/(1-2t)^3` or
    /// `(t^6+t^5+2t^4+t^3+1)/((1-t^2)^2(1-t)(1-t^3))`.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { tokens, pos: 0 };
        let r = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("unexpected {:?} at position {}", p.tokens[p.pos], p.pos)));
        }
        Ok(r)
    }
}

struct Parser {
    tokens: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.tokens.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc.add(&rhs) } else { acc.add(&rhs.neg()) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some('/') => {
                    self.pos += 1;
                    acc = acc.div(&self.unary()?)?;
                }
                Some('(' | 't') => acc = acc.mul(&self.power()?),
                Some(c) if c.is_ascii_digit() => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let e = self.integer()?;
            let e: u32 = e.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse(format!("expected a number at position {start}")));
        }
        let s: String = self.tokens[start..self.pos].iter().collect();
        s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
    }

    fn atom(&mut self) -> Result<RationalFunction> {
        match self.peek() {
            Some('t') => {
                self.pos += 1;
                Ok(RationalFunction::from_poly(Poly::t()))
            }
            Some('(') => {
                self.pos += 1;
                let r = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(Error::Parse(format!("expected ')' at position {}", self.pos)));
                }
                self.pos += 1;
                Ok(r)
            }
            Some(c) if c.is_ascii_digit() => Ok(RationalFunction::from_poly(Poly::constant(self.integer()?))),
            other => Err(Error::Parse(format!("unexpected {other:?} at position {}", self.pos))),
        }
    }
}
