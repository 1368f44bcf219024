//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

pub mod keel;
pub mod orbits;
pub mod rewriting;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rank of a dense rational matrix by plain Gaussian elimination.
pub fn dense_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = BigRational::one() / &rows[rank][c];
        for x in rows[rank].iter_mut() {
            *x *= &inv;
        }
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}
