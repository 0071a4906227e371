//! The fundamental domain `E = ⋃_{s<m} π^s O^×` and its level-`k` quotients.
//!
//! A point of the level-`k` quotient is a [`Coset`]: a valuation `s` together
//! with the first `k` digits of the unit part, least significant first. The
//! model never does field arithmetic; everything the operator needs is the
//! valuation of a difference, which for two expansions over a fixed residue
//! system is read off from the first digit where they disagree. That makes
//! unramified extensions (`q = p^f`) work with the same code.
//!
//! Ring operations (unit multiplication, inversion) are only available for
//! `f = 1`, where the digits are honest base-`p` digits of an integer.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{pow, Rational};

/// Largest modulus used for integer representatives (`p^(m+k)` must stay below it).
const MODULUS_LIMIT: u128 = 1 << 62;

/// A problem instance: prime `p`, residue degree `f`, ramification index `e`
/// (recorded only), torus exponent `m` and level `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    p: u64,
    f: u32,
    e: u32,
    m: u32,
    k: u32,
    q: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Params {
    pub fn new(p: u64, f: u32, m: u32, k: u32) -> Result<Self> {
        Self::with_ramification(p, f, 1, m, k)
    }

    pub fn with_ramification(p: u64, f: u32, e: u32, m: u32, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if f == 0 || e == 0 || m == 0 || k == 0 {
            return Err(Error::InvalidParams(format!(
                "f, e, m, k must be positive (got f={f}, e={e}, m={m}, k={k})"
            )));
        }
        let q = p
            .checked_pow(f)
            .ok_or_else(|| Error::InvalidParams(format!("q = {p}^{f} overflows")))?;
        let modulus = (q as u128).checked_pow(m + k);
        if modulus.is_none_or(|v| v >= MODULUS_LIMIT) {
            return Err(Error::InvalidParams(format!(
                "q^(m+k) = {q}^{} is too large for this implementation",
                m + k
            )));
        }
        Ok(Self { p, f, e, m, k, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    /// Ramification index. Recorded, never used: every formula depends on `q` only.
    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Effective base `q = p^f`.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Same instance at another level.
    pub fn at_level(&self, k: u32) -> Result<Self> {
        Self::with_ramification(self.p, self.f, self.e, self.m, k)
    }

    /// Number of cosets per valuation, `(q-1) q^(k-1)`.
    pub fn cosets_per_valuation(&self) -> usize {
        ((self.q - 1) * self.q.pow(self.k - 1)) as usize
    }

    /// `m (q-1) q^(k-1)`.
    pub fn coset_count(&self) -> usize {
        self.m as usize * self.cosets_per_valuation()
    }

    /// Total multiplicative volume `V = m (1 - 1/q)`.
    pub fn volume(&self) -> Rational {
        Rational::from_integer(self.m.into()) * (Rational::from_integer(1.into()) - pow(self.q, -1))
    }

    /// Position of `c` in the canonical order, if it belongs to this level.
    pub fn index_of(&self, c: &Coset) -> Option<usize> {
        if c.s >= self.m || c.digits.len() != self.k as usize || !c.is_valid(self.q) {
            return None;
        }
        let mut idx = (c.digits[0] - 1) as usize;
        for &d in &c.digits[1..] {
            idx = idx * self.q as usize + d as usize;
        }
        Some(c.s as usize * self.cosets_per_valuation() + idx)
    }

    /// Inverse of [`Params::index_of`].
    pub fn coset_at(&self, index: usize) -> Coset {
        let per = self.cosets_per_valuation();
        assert!(index < self.coset_count(), "coset index out of range");
        let s = (index / per) as u32;
        let mut rest = index % per;
        let q = self.q as usize;
        let mut digits = vec![0u32; self.k as usize];
        for slot in digits.iter_mut().skip(1).rev() {
            *slot = (rest % q) as u32;
            rest /= q;
        }
        digits[0] = rest as u32 + 1;
        Coset { s, digits }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} f={} m={} k={}", self.p, self.f, self.m, self.k)
    }
}

/// A point of the level-`k` quotient: valuation `s` and `k` unit digits
/// (least significant first, leading digit nonzero).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coset {
    pub s: u32,
    pub digits: Vec<u32>,
}

impl Coset {
    pub fn new(s: u32, digits: Vec<u32>) -> Self {
        Self { s, digits }
    }

    pub fn level(&self) -> u32 {
        self.digits.len() as u32
    }

    pub fn is_valid(&self, q: u64) -> bool {
        !self.digits.is_empty()
            && self.digits[0] != 0
            && self.digits.iter().all(|&d| (d as u64) < q)
    }

    /// The `q` cosets one level down, in canonical order.
    pub fn lifts(&self, q: u64) -> impl Iterator<Item = Coset> + '_ {
        (0..q as u32).map(move |d| {
            let mut digits = self.digits.clone();
            digits.push(d);
            Coset { s: self.s, digits }
        })
    }

    /// Extends the digit string with zeros up to level `k`.
    pub fn lift_with_zeros(&self, k: u32) -> Coset {
        let mut digits = self.digits.clone();
        digits.resize(k.max(self.level()) as usize, 0);
        Coset { s: self.s, digits }
    }

    /// Projection to a coarser level.
    pub fn truncate(&self, k: u32) -> Coset {
        Coset { s: self.s, digits: self.digits[..k as usize].to_vec() }
    }

    /// Compact form `s:d0d1...`; digits are separated by `.` when `q > 10`.
    pub fn compact(&self, q: u64) -> String {
        let sep = if q > 10 { "." } else { "" };
        let digits: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        format!("{}:{}", self.s, digits.join(sep))
    }

    pub fn parse_compact(src: &str, q: u64) -> Result<Coset> {
        let bad = || Error::Parse(format!("bad coset {src:?}"));
        let (s, rest) = src.split_once(':').ok_or_else(bad)?;
        let s: u32 = s.trim().parse().map_err(|_| bad())?;
        let digits: Vec<u32> = if q > 10 {
            rest.split('.').map(|d| d.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
        } else {
            rest.trim().chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect::<Result<_>>()?
        };
        let c = Coset { s, digits };
        if !c.is_valid(q) {
            return Err(bad());
        }
        Ok(c)
    }
}

/// All cosets of the level in canonical `(s, digits)` order.
pub fn enumerate_cosets(params: &Params) -> Vec<Coset> {
    (0..params.coset_count()).map(|i| params.coset_at(i)).collect()
}

/// `v(z - x)` for representatives of two distinct cosets.
pub fn valuation_of_difference(a: &Coset, b: &Coset) -> Result<u32> {
    if a.s != b.s {
        return Ok(a.s.min(b.s));
    }
    a.digits
        .iter()
        .zip(&b.digits)
        .position(|(x, y)| x != y)
        .map(|i| a.s + i as u32)
        .ok_or(Error::UnresolvedValuation)
}

/// Additive Haar measure of the ball represented by `c`: `q^(-s-k)`.
pub fn additive_measure(c: &Coset, params: &Params) -> Rational {
    pow(params.q(), -(c.s as i64) - c.level() as i64)
}

/// Multiplicative Haar measure of `c`: `q^(-k)`, the same for every coset.
pub fn multiplicative_measure(c: &Coset, params: &Params) -> Rational {
    pow(params.q(), -(c.level() as i64))
}

/// Measure of the shell `{z : v(z) = r, v(z - y) = i}` around a point `y` of valuation `r`.
pub fn shell_measure(r: u32, i: u32, params: &Params) -> Result<Rational> {
    if i < r {
        return Err(Error::ShellBelowBase { base: r, index: i });
    }
    let q = params.q();
    Ok(if i == r {
        Rational::from_integer((q as i64 - 2).into()) * pow(q, -(r as i64) - 1)
    } else {
        Rational::from_integer((q as i64 - 1).into()) * pow(q, -(i as i64) - 1)
    })
}

fn require_qp(params: &Params) -> Result<()> {
    if params.f() != 1 {
        return Err(Error::UnsupportedForExtensions(params.f()));
    }
    Ok(())
}

/// Unit part `Σ d_i p^i` as an integer modulo `p^k`.
fn unit_part(c: &Coset, p: u128) -> u128 {
    c.digits.iter().rev().fold(0u128, |acc, &d| acc * p + d as u128)
}

/// Full representative `Σ d_i p^(s+i)`.
fn representative(c: &Coset, p: u128) -> u128 {
    p.pow(c.s) * unit_part(c, p)
}

fn digits_of(mut value: u128, p: u128, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = (value % p) as u32;
            value /= p;
            d
        })
        .collect()
}

fn mod_inverse(a: u128, modulus: u128) -> Option<u128> {
    let g = (a as i128).extended_gcd(&(modulus as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(modulus as i128) as u128)
}

/// Coset of `u·x` (only for `f = 1`).
pub fn unit_multiply(c: &Coset, u: u64, params: &Params) -> Result<Coset> {
    require_qp(params)?;
    let p = params.p() as u128;
    if (u as u128).is_multiple_of(p) {
        return Err(Error::NotAUnit(u));
    }
    let modulus = p.pow(c.level());
    let w = unit_part(c, p) * (u as u128 % modulus) % modulus;
    Ok(Coset { s: c.s, digits: digits_of(w, p, c.level()) })
}

/// Coset of `p^(m-1) x^(-1)` (only for `f = 1`).
pub fn reflect(c: &Coset, params: &Params) -> Result<Coset> {
    require_qp(params)?;
    let p = params.p() as u128;
    let modulus = p.pow(c.level());
    let inv = mod_inverse(unit_part(c, p) % modulus, modulus).ok_or(Error::NotAUnit(0))?;
    Ok(Coset { s: params.m() - 1 - c.s, digits: digits_of(inv, p, c.level()) })
}

/// Coset of `y + u(x - y)` for a unit `u ≡ 1 mod p^(m - v(y))` (only for `f = 1`).
///
/// Such `x'` shares with `x` the leading `m - v(y)` digits of the difference
/// with `y`. The result is well defined at level `k` because `(1-u)y` is
/// known modulo `p^(m+k)`.
pub fn rescale_difference(x: &Coset, y: &Coset, u: u64, params: &Params) -> Result<Coset> {
    require_qp(params)?;
    let p = params.p() as u128;
    let m = params.m();
    let step = p.pow(m - y.s);
    if u as u128 % step != 1 % step {
        return Err(Error::InvalidParams(format!("u = {u} is not 1 modulo p^{}", m - y.s)));
    }
    let modulus = p.pow(x.s + x.level());
    let uu = u as u128 % modulus;
    let one_minus_u = (1 + modulus - uu) % modulus;
    let value = (uu * representative(x, p) + one_minus_u * (representative(y, p) % modulus)) % modulus;
    let unit = value / p.pow(x.s);
    Ok(Coset { s: x.s, digits: digits_of(unit, p, x.level()) })
}

/// Units `1 ≤ u < p^k` coprime to `p`.
pub fn units_below(params: &Params) -> Vec<u64> {
    let p = params.p();
    let bound = p.pow(params.k());
    (1..bound).filter(|u| u % p != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use num_traits::Zero;

    fn c(s: u32, d: &[u32]) -> Coset {
        Coset::new(s, d.to_vec())
    }

    #[test]
    fn enumeration_examples() {
        let p = Params::new(2, 1, 1, 1).unwrap();
        assert_eq!(enumerate_cosets(&p), vec![c(0, &[1])]);
        let p = Params::new(3, 1, 1, 1).unwrap();
        assert_eq!(enumerate_cosets(&p), vec![c(0, &[1]), c(0, &[2])]);
        let p = Params::new(2, 1, 2, 2).unwrap();
        assert_eq!(
            enumerate_cosets(&p),
            vec![c(0, &[1, 0]), c(0, &[1, 1]), c(1, &[1, 0]), c(1, &[1, 1])]
        );
    }

    #[test]
    fn counts_and_indexing() {
        for (p, f, m, k) in [(2, 1, 3, 4), (3, 1, 2, 3), (2, 2, 2, 3), (5, 1, 1, 2), (3, 2, 1, 2)] {
            let params = Params::new(p, f, m, k).unwrap();
            let q = params.q() as usize;
            let cosets = enumerate_cosets(&params);
            assert_eq!(cosets.len(), m as usize * (q - 1) * q.pow(k - 1));
            for (i, co) in cosets.iter().enumerate() {
                assert_eq!(params.index_of(co), Some(i));
            }
            assert!(cosets.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Params::new(4, 1, 1, 1).is_err());
        assert!(Params::new(1, 1, 1, 1).is_err());
        assert!(Params::new(2, 0, 1, 1).is_err());
        assert!(Params::new(2, 1, 0, 1).is_err());
        assert!(Params::new(2, 1, 1, 0).is_err());
        assert!(Params::new(2, 1, 40, 40).is_err());
        assert!(Params::with_ramification(2, 1, 0, 1, 1).is_err());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation_of_difference(&c(0, &[1, 0]), &c(1, &[1, 0])).unwrap(), 0);
        assert_eq!(valuation_of_difference(&c(0, &[1, 0]), &c(0, &[1, 1])).unwrap(), 1);
        assert_eq!(valuation_of_difference(&c(0, &[1]), &c(0, &[2])).unwrap(), 0);
        assert_eq!(valuation_of_difference(&c(1, &[2, 0, 1]), &c(1, &[2, 0, 2])).unwrap(), 3);
        assert_eq!(
            valuation_of_difference(&c(0, &[1]), &c(0, &[1])),
            Err(Error::UnresolvedValuation)
        );
    }

    #[test]
    fn measure_examples() {
        let params = Params::new(3, 1, 2, 2).unwrap();
        assert_eq!(additive_measure(&c(1, &[1, 0]), &params), frac(1, 27));
        let p31 = Params::new(3, 1, 1, 1).unwrap();
        assert_eq!(multiplicative_measure(&c(0, &[1]), &p31), frac(1, 3));
        let p22 = Params::new(2, 1, 1, 2).unwrap();
        assert_eq!(multiplicative_measure(&c(0, &[1, 1]), &p22), frac(1, 4));
    }

    #[test]
    fn measure_totals() {
        for (p, f, m, k) in [(2, 1, 2, 3), (3, 1, 3, 2), (2, 2, 2, 2)] {
            let params = Params::new(p, f, m, k).unwrap();
            let q = params.q();
            let cosets = enumerate_cosets(&params);
            for s in 0..m {
                let total: Rational = cosets
                    .iter()
                    .filter(|co| co.s == s)
                    .map(|co| additive_measure(co, &params))
                    .sum();
                assert_eq!(total, int(q as i64 - 1) * pow(q, -(s as i64) - 1));
            }
            let mult: Rational = cosets.iter().map(|co| multiplicative_measure(co, &params)).sum();
            assert_eq!(mult, params.volume());
        }
        let params = Params::new(2, 1, 2, 3).unwrap();
        let all: Rational = enumerate_cosets(&params).iter().map(|co| additive_measure(co, &params)).sum();
        assert_eq!(all, frac(3, 4));
    }

    #[test]
    fn shell_measure_examples() {
        let p2 = Params::new(2, 1, 2, 1).unwrap();
        let p3 = Params::new(3, 1, 1, 1).unwrap();
        assert!(shell_measure(0, 0, &p2).unwrap().is_zero());
        assert_eq!(shell_measure(0, 0, &p3).unwrap(), frac(1, 3));
        assert_eq!(shell_measure(1, 3, &p2).unwrap(), frac(1, 16));
        assert!(shell_measure(2, 1, &p2).is_err());
    }

    #[test]
    fn shell_measures_match_enumeration() {
        for (p, f, m, k) in [(2, 1, 2, 4), (3, 1, 2, 3), (2, 2, 2, 3)] {
            let params = Params::new(p, f, m, k).unwrap();
            let cosets = enumerate_cosets(&params);
            for y in cosets.iter().step_by(3) {
                let r = y.s;
                for i in r..r + k {
                    let total: Rational = cosets
                        .iter()
                        .filter(|z| *z != y && z.s == r)
                        .filter(|z| valuation_of_difference(z, y).unwrap() == i)
                        .map(|z| additive_measure(z, &params))
                        .sum();
                    assert_eq!(total, shell_measure(r, i, &params).unwrap(), "{y:?} {i}");
                }
                let shells: Rational = (r..r + k).map(|i| shell_measure(r, i, &params).unwrap()).sum();
                let q = params.q();
                assert_eq!(
                    shells + pow(q, -(r as i64) - k as i64),
                    int(q as i64 - 1) * pow(q, -(r as i64) - 1)
                );
            }
        }
    }

    #[test]
    fn unit_multiply_examples() {
        let p2 = Params::new(2, 1, 1, 2).unwrap();
        assert_eq!(unit_multiply(&c(0, &[1, 0]), 3, &p2).unwrap(), c(0, &[1, 1]));
        let p3 = Params::new(3, 1, 1, 1).unwrap();
        assert_eq!(unit_multiply(&c(0, &[2]), 2, &p3).unwrap(), c(0, &[1]));
        for co in enumerate_cosets(&Params::new(3, 1, 2, 3).unwrap()) {
            assert_eq!(unit_multiply(&co, 1, &p3).unwrap(), co);
        }
        assert_eq!(unit_multiply(&c(0, &[1]), 3, &p3), Err(Error::NotAUnit(3)));
        let ext = Params::new(2, 2, 1, 1).unwrap();
        assert_eq!(unit_multiply(&c(0, &[1]), 1, &ext), Err(Error::UnsupportedForExtensions(2)));
    }

    #[test]
    fn reflect_examples() {
        let p3 = Params::new(3, 1, 1, 1).unwrap();
        assert_eq!(reflect(&c(0, &[2]), &p3).unwrap(), c(0, &[2]));
        let p2 = Params::new(2, 1, 2, 1).unwrap();
        assert_eq!(reflect(&c(0, &[1]), &p2).unwrap(), c(1, &[1]));
        let ext = Params::new(3, 2, 1, 1).unwrap();
        assert!(reflect(&c(0, &[1]), &ext).is_err());
    }

    #[test]
    fn compact_strings() {
        assert_eq!(c(1, &[2, 0, 1]).compact(3), "1:201");
        assert_eq!(c(0, &[11, 3]).compact(13), "0:11.3");
        assert_eq!(Coset::parse_compact("0:11.3", 13).unwrap(), c(0, &[11, 3]));
        assert_eq!(Coset::parse_compact("2:102", 3).unwrap(), c(2, &[1, 0, 2]));
        assert!(Coset::parse_compact("0:0", 3).is_err());
        assert!(Coset::parse_compact("0:3", 3).is_err());
        let json = serde_json::to_string(&c(1, &[1, 0])).unwrap();
        assert_eq!(json, r#"{"s":1,"digits":[1,0]}"#);
    }

    #[test]
    fn rescale_difference_fixes_valuations() {
        let params = Params::new(2, 1, 2, 3).unwrap();
        let cosets = enumerate_cosets(&params);
        for y in &cosets {
            let step = 2u64.pow(2 - y.s);
            for x in cosets.iter().filter(|x| *x != y) {
                for u in (1..8u64).filter(|u| u % step == 1 % step) {
                    let x2 = rescale_difference(x, y, u, &params).unwrap();
                    assert_eq!(x2.s, x.s);
                    assert_eq!(
                        valuation_of_difference(&x2, y).unwrap(),
                        valuation_of_difference(x, y).unwrap()
                    );
                }
            }
        }
    }
}
