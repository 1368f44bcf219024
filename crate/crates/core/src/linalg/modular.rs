//! Rank bounds from reductions modulo random word-size primes.
//!
//! The rank of a reduction never exceeds the rational rank, so the maximum
//! over several primes is a lower bound that is almost always exact. A
//! prime dividing some denominator is skipped since the reduction is then
//! undefined.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{rank_rows, Budget, Field, PivotOrder, SparseRatMatrix};
use crate::error::Result;
use crate::rational::Rational;

/// Whether a rank is known exactly or only bounded from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    LowerBound,
    Confirmed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularRank {
    pub rank: usize,
    pub certainty: Certainty,
    /// Primes actually used (skipped primes are not listed).
    pub primes: Vec<u64>,
}

struct Fp(u64);

impl Fp {
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.0 - 2)
    }

    fn reduce(&self, x: &BigInt) -> u64 {
        x.mod_floor(&BigInt::from(self.0)).to_u64().expect("residue fits in u64")
    }

    /// Image of a rational, or `None` when the denominator vanishes mod p.
    fn reduce_rational(&self, q: &Rational) -> Option<u64> {
        let d = self.reduce(q.denom());
        if d == 0 {
            return None;
        }
        Some(self.mul(self.reduce(q.numer()), self.inv(d)))
    }
}

impl Field for Fp {
    type E = u64;

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn sub_mul(&self, a: &u64, f: &u64, b: &u64) -> u64 {
        let fb = self.mul(*f, *b);
        if *a >= fb {
            a - fb
        } else {
            self.0 - (fb - a)
        }
    }

    fn neg_mul(&self, f: &u64, b: &u64) -> u64 {
        self.sub_mul(&0, f, b)
    }

    fn div(&self, a: &u64, b: &u64) -> u64 {
        self.mul(*a, self.inv(*b))
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let f = Fp(n);
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn random_prime(rng: &mut StdRng) -> u64 {
    loop {
        let c = rng.gen_range((1u64 << 61)..(1u64 << 62)) | 1;
        if is_prime(c) {
            return c;
        }
    }
}

/// Rank of the reduction mod `p`, or `None` if some denominator vanishes.
pub fn rank_mod_p(m: &SparseRatMatrix, p: u64) -> Option<usize> {
    let f = Fp(p);
    let mut rows = vec![Vec::new(); m.rows()];
    for (r, c, q) in m.entries() {
        let x = f.reduce_rational(q)?;
        if x != 0 {
            rows[r].push((c, x));
        }
    }
    Some(rank_rows(&f, rows, m.cols(), PivotOrder::Markowitz, &Budget::default()).expect("no budget set"))
}

/// Maximum rank over reductions modulo the given primes, skipping primes
/// that divide a denominator.
pub fn rank_modular_with_primes(m: &SparseRatMatrix, primes: &[u64]) -> ModularRank {
    let mut best = 0;
    let mut used = Vec::new();
    for &p in primes {
        if let Some(r) = rank_mod_p(m, p) {
            best = best.max(r);
            used.push(p);
        }
    }
    ModularRank { rank: best, certainty: Certainty::LowerBound, primes: used }
}

/// Maximum rank over `prime_count` usable random primes in `[2^61, 2^62)`.
/// The primes come from a fixed seed, so results are reproducible.
pub fn rank_modular(m: &SparseRatMatrix, prime_count: usize) -> ModularRank {
    let mut rng = StdRng::seed_from_u64(0x5eed_0fc4);
    let mut best = ModularRank { rank: 0, certainty: Certainty::LowerBound, primes: Vec::new() };
    let mut attempts = 0;
    while best.primes.len() < prime_count.max(1) && attempts < 16 * prime_count.max(1) {
        attempts += 1;
        let p = random_prime(&mut rng);
        if let Some(r) = rank_mod_p(m, p) {
            best.rank = best.rank.max(r);
            best.primes.push(p);
        }
    }
    best
}

/// Modular rank followed by exact confirmation.
pub fn rank_confirmed(m: &SparseRatMatrix, prime_count: usize, budget: &Budget) -> Result<ModularRank> {
    let mut r = rank_modular(m, prime_count);
    let exact = super::rank_with(m, PivotOrder::Markowitz, budget)?;
    if exact == r.rank {
        r.certainty = Certainty::Confirmed;
    }
    r.rank = exact;
    Ok(r)
}
