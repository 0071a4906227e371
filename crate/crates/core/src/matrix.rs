//! Dense exact rational matrices.
//!
//! Elimination first runs over `Ratio<i128>` with checked arithmetic and
//! restarts over `BigRational` on the first overflow. Products scale each row
//! of the left factor and each column of the right factor to integers and
//! accumulate in `i128`, again with a big-integer fallback.

use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedDiv, CheckedMul, CheckedSub, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modular;
use crate::rational::{to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, got: bad.len() });
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn constant(rows: usize, cols: usize, value: Rational) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// `c_{ij} = c_{m-1-i, m-1-j}` and symmetric.
    pub fn is_bisymmetric(&self) -> bool {
        let n = self.rows;
        self.is_symmetric()
            && (0..n).all(|i| (0..n).all(|j| self.get(i, j) == self.get(n - 1 - i, n - 1 - j)))
    }

    /// The common value if every entry is equal.
    pub fn constant_value(&self) -> Option<&Rational> {
        let first = self.data.first()?;
        self.data.iter().all(|v| v == first).then_some(first)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn max_entry(&self) -> Option<&Rational> {
        self.data.iter().max()
    }

    /// Adds the same constant to every entry.
    pub fn shift(&self, c: &Rational) -> Self {
        self.map(|v| v + c)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<Rational> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let left = ScaledRows::from_rows(self.rows, self.cols, |i, j| self.get(i, j));
        let right = ScaledRows::from_rows(other.cols, other.rows, |j, i| other.get(i, j));
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                data.push(left.dot(i, &right, j));
            }
        }
        Ok(Self { rows: self.rows, cols: other.cols, data })
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        let left = ScaledRows::from_rows(self.rows, self.cols, |i, j| self.get(i, j));
        let right = ScaledRows::from_rows(1, v.len(), |_, j| &v[j]);
        Ok((0..self.rows).map(|i| left.dot(i, &right, 0)).collect())
    }

    /// Exact inverse; fails with [`Error::Singular`].
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        self.solve(&Self::identity(self.rows))
    }

    /// Solves `self · X = rhs` for square nonsingular `self`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: rhs.rows });
        }
        if let Some(x) = self.solve_modular(rhs) {
            return Ok(x);
        }
        self.solve_exact(rhs)
    }

    /// Candidate from residues modulo word-sized primes, certified by `self · X = rhs`.
    fn solve_modular(&self, rhs: &Self) -> Option<Self> {
        let (n, c) = (self.rows, rhs.cols);
        let width = n + c;
        let mut used = Vec::new();
        let mut blocks: Vec<Vec<u64>> = Vec::new();
        let mut singular = 0;
        for &p in &modular::PRIMES {
            let mut a = Vec::with_capacity(n * width);
            for i in 0..n {
                a.extend(modular::reduce_all(self.row(i), p)?);
                a.extend(modular::reduce_all(rhs.row(i), p)?);
            }
            if modular::rref(&mut a, n, width, n, p).len() < n {
                singular += 1;
                if singular >= 2 {
                    return None;
                }
                continue;
            }
            used.push(p);
            blocks.push((0..n).flat_map(|i| a[i * width + n..(i + 1) * width].to_vec()).collect());
            let mut rec = modular::Reconstructor::new(&used);
            let mut key = vec![0u64; used.len()];
            let candidate: Option<Vec<Rational>> = (0..n * c)
                .map(|e| {
                    for (slot, block) in key.iter_mut().zip(&blocks) {
                        *slot = block[e];
                    }
                    rec.recover(&key)
                })
                .collect();
            if let Some(data) = candidate {
                let x = Self { rows: n, cols: c, data };
                if self.mul(&x).ok()? == *rhs {
                    return Some(x);
                }
            }
        }
        None
    }

    fn solve_exact(&self, rhs: &Self) -> Result<Self> {
        let n = self.rows;
        let width = n + rhs.cols;
        let augmented = |i: usize, j: usize| {
            if j < n {
                self.get(i, j)
            } else {
                rhs.get(i, j - n)
            }
        };
        let reduced = match small_entries(n, width, augmented) {
            Some(small) => match eliminate(small, n, width, n) {
                Ok(m) => Ok(m.into_iter().map(|v| Rational::new((*v.numer()).into(), (*v.denom()).into())).collect()),
                Err(Elimination::Overflow) => Err(()),
                Err(Elimination::Singular) => return Err(Error::Singular),
            },
            None => Err(()),
        };
        let reduced = match reduced {
            Ok(r) => r,
            Err(()) => {
                let big: Vec<Rational> =
                    (0..n).flat_map(|i| (0..width).map(move |j| (i, j))).map(|(i, j)| augmented(i, j).clone()).collect();
                match eliminate(big, n, width, n) {
                    Ok(m) => m,
                    Err(_) => return Err(Error::Singular),
                }
            }
        };
        let data = (0..n).flat_map(|i| reduced[i * width + n..(i + 1) * width].to_vec()).collect();
        Ok(Self { rows: n, cols: rhs.cols, data })
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        self.rank_modular().unwrap_or_else(|| self.rank_exact())
    }

    /// A rank modulo a prime is a lower bound; an exactly verified kernel of the
    /// complementary dimension makes it an upper bound too.
    fn rank_modular(&self) -> Option<usize> {
        let (r, c) = (self.rows, self.cols);
        let mut used = Vec::new();
        let mut kernels: Vec<Vec<Vec<u64>>> = Vec::new();
        let mut pivot_cols: Option<Vec<usize>> = None;
        for &p in modular::PRIMES.iter().take(4) {
            let mut a = modular::reduce_all(&self.data, p)?;
            let pivots = modular::rref(&mut a, r, c, c, p);
            if pivots.len() == r.min(c) {
                return Some(pivots.len());
            }
            match &pivot_cols {
                Some(prev) if *prev != pivots => return None,
                _ => pivot_cols = Some(pivots.clone()),
            }
            let free: Vec<usize> = (0..c).filter(|j| !pivots.contains(j)).collect();
            let basis = free
                .iter()
                .map(|&f| {
                    let mut v = vec![0u64; c];
                    v[f] = 1;
                    for (i, &pc) in pivots.iter().enumerate() {
                        let e = a[i * c + f];
                        v[pc] = if e == 0 { 0 } else { p - e };
                    }
                    v
                })
                .collect();
            used.push(p);
            kernels.push(basis);
            let mut rec = modular::Reconstructor::new(&used);
            let verified = (0..free.len()).all(|b| {
                let v: Option<Vec<Rational>> = (0..c)
                    .map(|j| rec.recover(&kernels.iter().map(|k| k[b][j]).collect::<Vec<_>>()))
                    .collect();
                v.and_then(|v| self.mul_vec(&v).ok()).is_some_and(|w| w.iter().all(Zero::is_zero))
            });
            if verified {
                return Some(c - free.len());
            }
        }
        None
    }

    fn rank_exact(&self) -> usize {
        let (r, c) = (self.rows, self.cols);
        if let Some(small) = small_entries(r, c, |i, j| self.get(i, j)) {
            if let Some(rank) = rank_of(small, r, c) {
                return rank;
            }
        }
        rank_of(self.data.clone(), r, c).expect("big rationals do not overflow")
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(self.get(i, j)))
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        self.get(i, j)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(crate::rational::render).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// ---- elimination engine ----

enum Elimination {
    Overflow,
    Singular,
}

/// Field operations that may overflow.
trait Scalar: Clone + Zero {
    fn sub_c(&self, o: &Self) -> Option<Self>;
    fn mul_c(&self, o: &Self) -> Option<Self>;
    fn div_c(&self, o: &Self) -> Option<Self>;
    fn magnitude(&self) -> f64;
}

type Small = Ratio<i128>;

impl Scalar for Small {
    fn sub_c(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul_c(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div_c(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn magnitude(&self) -> f64 {
        (*self.numer() as f64 / *self.denom() as f64).abs()
    }
}

impl Scalar for Rational {
    fn sub_c(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul_c(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_c(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn magnitude(&self) -> f64 {
        to_f64(self).abs()
    }
}

fn small_entries<'a>(rows: usize, cols: usize, get: impl Fn(usize, usize) -> &'a Rational) -> Option<Vec<Small>> {
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let v = get(i, j);
            out.push(Small::new_raw(v.numer().to_i128()?, v.denom().to_i128()?));
        }
    }
    Some(out)
}

/// Row-reduces the first `pivots` columns to the identity (Gauss-Jordan).
fn eliminate<T: Scalar>(mut a: Vec<T>, rows: usize, width: usize, pivots: usize) -> std::result::Result<Vec<T>, Elimination> {
    let mut nonzero: Vec<usize> = Vec::with_capacity(width);
    for col in 0..pivots {
        let pivot_row = best_pivot(&a, rows, width, col, col).ok_or(Elimination::Singular)?;
        swap_rows(&mut a, width, col, pivot_row);
        let base = col * width;
        let pivot = a[base + col].clone();
        nonzero.clear();
        for j in col + 1..width {
            if !a[base + j].is_zero() {
                a[base + j] = a[base + j].div_c(&pivot).ok_or(Elimination::Overflow)?;
                nonzero.push(j);
            }
        }
        a[base + col] = one_like(&pivot);
        for i in 0..rows {
            if i == col || a[i * width + col].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut a[i * width + col], T::zero());
            for &j in &nonzero {
                let delta = factor.mul_c(&a[base + j]).ok_or(Elimination::Overflow)?;
                let slot = i * width + j;
                a[slot] = a[slot].sub_c(&delta).ok_or(Elimination::Overflow)?;
            }
        }
    }
    Ok(a)
}

fn rank_of<T: Scalar>(mut a: Vec<T>, rows: usize, cols: usize) -> Option<usize> {
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot_row) = best_pivot(&a, rows, cols, col, rank) else { continue };
        swap_rows(&mut a, cols, rank, pivot_row);
        let base = rank * cols;
        let pivot = a[base + col].clone();
        for i in rank + 1..rows {
            if a[i * cols + col].is_zero() {
                continue;
            }
            let factor = a[i * cols + col].div_c(&pivot)?;
            a[i * cols + col] = T::zero();
            for j in col + 1..cols {
                if a[base + j].is_zero() {
                    continue;
                }
                let delta = factor.mul_c(&a[base + j])?;
                a[i * cols + j] = a[i * cols + j].sub_c(&delta)?;
            }
        }
        rank += 1;
    }
    Some(rank)
}

/// Largest float magnitude in column `col` at or below `from`; ties go to the first row.
fn best_pivot<T: Scalar>(a: &[T], rows: usize, width: usize, col: usize, from: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in from..rows {
        let v = &a[i * width + col];
        if v.is_zero() {
            continue;
        }
        let mag = v.magnitude();
        if best.is_none_or(|(_, b)| mag > b) {
            best = Some((i, mag));
        }
    }
    best.map(|(i, _)| i)
}

fn swap_rows<T>(a: &mut [T], width: usize, i: usize, j: usize) {
    if i == j {
        return;
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let (head, tail) = a.split_at_mut(hi * width);
    head[lo * width..(lo + 1) * width].swap_with_slice(&mut tail[..width]);
}

fn one_like<T: Scalar>(pivot: &T) -> T {
    pivot.div_c(pivot).expect("x / x never overflows")
}

// ---- scaled integer products ----

/// Rows of a rational matrix as integer vectors times a per-row denominator.
struct ScaledRows {
    len: usize,
    small: Option<Vec<i128>>,
    big: Vec<BigInt>,
    denominators: Vec<BigInt>,
}

impl ScaledRows {
    fn from_rows<'a>(rows: usize, len: usize, get: impl Fn(usize, usize) -> &'a Rational) -> Self {
        let mut big = Vec::with_capacity(rows * len);
        let mut denominators = Vec::with_capacity(rows);
        for i in 0..rows {
            let lcm = (0..len).fold(BigInt::one(), |acc, j| acc.lcm(get(i, j).denom()));
            for j in 0..len {
                let v = get(i, j);
                big.push(v.numer() * (&lcm / v.denom()));
            }
            denominators.push(lcm);
        }
        let small = big.iter().map(|v| v.to_i128()).collect::<Option<Vec<_>>>();
        Self { len, small, big, denominators }
    }

    fn dot(&self, i: usize, other: &ScaledRows, j: usize) -> Rational {
        let den = &self.denominators[i] * &other.denominators[j];
        let (a, b) = (i * self.len, j * other.len);
        if let (Some(x), Some(y)) = (&self.small, &other.small) {
            let mut acc: i128 = 0;
            let ok = (0..self.len).try_for_each(|t| {
                acc = x[a + t].checked_mul(y[b + t]).and_then(|p| acc.checked_add(p))?;
                Some(())
            });
            if ok.is_some() {
                return Rational::new(acc.into(), den);
            }
        }
        let acc: BigInt = (0..self.len).map(|t| &self.big[a + t] * &other.big[b + t]).sum();
        Rational::new(acc, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn m(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn inverse_of_small_matrix() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.inverse().unwrap(), m(&[&[1, -1], &[-1, 2]]));
        assert_eq!(a.mul(&a.inverse().unwrap()).unwrap(), RationalMatrix::identity(2));
    }

    #[test]
    fn exact_and_modular_paths_agree() {
        let a = RationalMatrix::from_fn(6, 6, |i, j| frac((i * 7 + j * 3) as i64 % 11 - 5, (i + 2 * j + 1) as i64));
        let b = RationalMatrix::from_fn(6, 2, |i, j| frac(i as i64 - j as i64, 3));
        assert_eq!(a.solve_modular(&b).unwrap(), a.solve_exact(&b).unwrap());
        assert_eq!(a.rank_modular(), Some(a.rank_exact()));
    }

    #[test]
    fn singular_detected() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(a.inverse(), Err(Error::Singular));
        assert_eq!(a.rank(), 1);
    }

    #[test]
    fn big_fallback_matches() {
        // Hilbert matrices overflow i128 quickly.
        let n = 30;
        let h = RationalMatrix::from_fn(n, n, |i, j| frac(1, (i + j + 1) as i64));
        let inv = h.inverse().unwrap();
        assert_eq!(h.mul(&inv).unwrap(), RationalMatrix::identity(n));
        assert_eq!(h.rank(), n);
    }

    #[test]
    fn solve_and_mul_vec() {
        let a = m(&[&[4, 1, 0], &[1, 3, 1], &[0, 1, 2]]);
        let b = RationalMatrix::from_fn(3, 1, |i, _| int(i as i64 + 1));
        let x = a.solve(&b).unwrap();
        let col: Vec<Rational> = (0..3).map(|i| x[(i, 0)].clone()).collect();
        assert_eq!(a.mul_vec(&col).unwrap(), vec![int(1), int(2), int(3)]);
        assert!(a.mul_vec(&[int(1)]).is_err());
    }

    #[test]
    fn structural_predicates() {
        let a = m(&[&[1, 2, 3], &[2, 5, 2], &[3, 2, 1]]);
        assert!(a.is_symmetric());
        assert!(a.is_bisymmetric());
        assert!(!m(&[&[1, 2], &[3, 1]]).is_symmetric());
        assert_eq!(RationalMatrix::constant(2, 3, frac(1, 2)).constant_value(), Some(&frac(1, 2)));
        assert_eq!(a.max_entry(), Some(&int(5)));
        assert_eq!(a.row_sums(), vec![int(6), int(9), int(6)]);
    }
}
