//! Multi-modular linear algebra with rational reconstruction.
//!
//! Nothing here is trusted on its own: every candidate produced modulo a set of
//! primes is certified by an exact rational check in [`crate::matrix`] before
//! it is returned.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

/// Primes just below `2^62`.
pub(crate) const PRIMES: [u64; 12] = [
    4611686018427387847,
    4611686018427387817,
    4611686018427387787,
    4611686018427387761,
    4611686018427387751,
    4611686018427387737,
    4611686018427387733,
    4611686018427387709,
    4611686018427387701,
    4611686018427387631,
    4611686018427387617,
    4611686018427387587,
];

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Multiplier with a precomputed quotient approximation (Shoup); needs `p < 2^63`.
#[derive(Clone, Copy)]
struct Shoup {
    w: u64,
    w_pre: u64,
}

impl Shoup {
    fn new(w: u64, p: u64) -> Self {
        Self { w, w_pre: (((w as u128) << 64) / p as u128) as u64 }
    }

    #[inline]
    fn mul(self, b: u64, p: u64) -> u64 {
        let q = ((self.w_pre as u128 * b as u128) >> 64) as u64;
        let r = self.w.wrapping_mul(b).wrapping_sub(q.wrapping_mul(p));
        if r >= p {
            r - p
        } else {
            r
        }
    }
}

pub(crate) fn reduce(r: &Rational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let num = r.numer().mod_floor(&pb).to_u64()?;
    let den = r.denom().mod_floor(&pb).to_u64()?;
    (den != 0).then(|| mul_mod(num, inv_mod(den, p), p))
}

pub(crate) fn reduce_all(values: &[Rational], p: u64) -> Option<Vec<u64>> {
    values.iter().map(|v| reduce(v, p)).collect()
}

/// In-place Gauss-Jordan modulo `p`; returns the pivot columns among the first `limit`.
pub(crate) fn rref(a: &mut [u64], rows: usize, width: usize, limit: usize, p: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut nonzero = Vec::with_capacity(width);
    for col in 0..limit {
        let rank = pivots.len();
        if rank == rows {
            break;
        }
        let Some(pr) = (rank..rows).find(|&i| a[i * width + col] != 0) else { continue };
        if pr != rank {
            for j in 0..width {
                a.swap(pr * width + j, rank * width + j);
            }
        }
        let base = rank * width;
        let inv = Shoup::new(inv_mod(a[base + col], p), p);
        nonzero.clear();
        for j in col..width {
            if a[base + j] != 0 {
                a[base + j] = inv.mul(a[base + j], p);
                nonzero.push(j);
            }
        }
        let (head, rest) = a.split_at_mut(base);
        let (pivot_row, tail) = rest.split_at_mut(width);
        for row in head.chunks_exact_mut(width).chain(tail.chunks_exact_mut(width)) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            let f = Shoup::new(p - f, p);
            for &j in &nonzero {
                let v = row[j] + f.mul(pivot_row[j], p);
                row[j] = if v >= p { v - p } else { v };
            }
        }
        pivots.push(col);
    }
    pivots
}

/// Rational reconstruction of many values from residues modulo several primes.
pub(crate) struct Reconstructor<'a> {
    primes: &'a [u64],
    modulus: BigInt,
    bound: BigInt,
    cache: HashMap<Vec<u64>, Option<Rational>>,
}

impl<'a> Reconstructor<'a> {
    pub(crate) fn new(primes: &'a [u64]) -> Self {
        let modulus: BigInt = primes.iter().map(|&p| BigInt::from(p)).product();
        let bound = (&modulus >> 1u32).sqrt();
        Self { primes, modulus, bound, cache: HashMap::new() }
    }

    /// `residues[t]` is the value modulo `primes[t]`.
    pub(crate) fn recover(&mut self, residues: &[u64]) -> Option<Rational> {
        if let Some(hit) = self.cache.get(residues) {
            return hit.clone();
        }
        let value = self.crt(residues).and_then(|a| wang(&a, &self.modulus, &self.bound));
        self.cache.insert(residues.to_vec(), value.clone());
        value
    }

    fn crt(&self, residues: &[u64]) -> Option<BigInt> {
        let mut x = BigInt::from(residues[0]);
        let mut m = BigInt::from(self.primes[0]);
        for (&r, &p) in residues.iter().zip(self.primes).skip(1) {
            let pb = BigInt::from(p);
            let xm = x.mod_floor(&pb).to_u64()?;
            let diff = (r + p - xm) % p;
            let minv = inv_mod(m.mod_floor(&pb).to_u64()?, p);
            x += &m * BigInt::from(mul_mod(diff, minv, p));
            m *= pb;
        }
        Some(x)
    }
}

/// Smallest `r/s ≡ a (mod m)` with `|r|, s ≤ bound`, if it exists.
fn wang(a: &BigInt, m: &BigInt, bound: &BigInt) -> Option<Rational> {
    let (mut r0, mut r1) = (m.clone(), a.clone());
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while &r1 > bound {
        let (quot, rem) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, rem);
        let next = &s0 - &quot * &s1;
        s0 = std::mem::replace(&mut s1, next);
    }
    if s1.is_zero() || s1.abs() > *bound || !r1.gcd(&s1).is_one() {
        return None;
    }
    Some(Rational::new(r1, s1))
}
