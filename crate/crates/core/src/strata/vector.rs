use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::NormalFormStratum;
use crate::rational::{serde_rational, Rational};
use crate::strata::Locus;

/// Sparse rational combination of normal-form strata of one degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrataVector {
    n: u32,
    degree: usize,
    terms: BTreeMap<NormalFormStratum, Rational>,
}

impl StrataVector {
    pub fn new(n: u32, degree: usize) -> Self {
        Self { n, degree, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<NormalFormStratum, Rational> {
        &self.terms
    }

    pub fn coeff(&self, s: &NormalFormStratum) -> Rational {
        self.terms.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, s: NormalFormStratum, c: Rational) {
        assert_eq!(s.n(), self.n, "stratum has the wrong number of legs");
        assert_eq!(s.degree(), self.degree, "stratum has the wrong degree");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(s) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &StrataVector, c: &Rational) {
        for (s, x) in &other.terms {
            self.add_term(s.clone(), x * c);
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = Self::new(self.n, self.degree);
        out.add_scaled(self, c);
        out
    }

    /// Drop terms whose graph lies outside `locus`.
    pub fn project(&self, locus: &Locus) -> Self {
        Self {
            n: self.n,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|(s, _)| locus.contains(s.graph()))
                .map(|(s, c)| (s.clone(), c.clone()))
                .collect(),
        }
    }
}

impl std::ops::Sub for &StrataVector {
    type Output = StrataVector;

    fn sub(self, rhs: &StrataVector) -> StrataVector {
        let mut out = self.clone();
        out.add_scaled(rhs, &-crate::rational::int(1));
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    stratum: NormalFormStratum,
    #[serde(with = "serde_rational")]
    coeff: Rational,
}

#[derive(Serialize, Deserialize)]
struct VectorJson {
    n: u32,
    degree: usize,
    terms: Vec<TermJson>,
}

impl Serialize for StrataVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorJson {
            n: self.n,
            degree: self.degree,
            terms: self.terms.iter().map(|(st, c)| TermJson { stratum: st.clone(), coeff: c.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StrataVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = VectorJson::deserialize(d)?;
        let mut out = StrataVector::new(j.n, j.degree);
        for t in j.terms {
            if t.stratum.n() != j.n || t.stratum.degree() != j.degree {
                return Err(D::Error::custom("term does not match the vector's n and degree"));
            }
            out.add_term(t.stratum, t.coeff);
        }
        Ok(out)
    }
}
