//! The discretized flat Laplacian on level-`k` locally constant functions.
//!
//! For cosets `x ≠ z` the matrix entry is `|x| μ⁺(z) / |z - x|²`, which
//! simplifies to `q^(2v - s_x - s_z - k)` with `v = v(z - x)`. The diagonal is
//! minus the off-diagonal row sum, so constants are in the kernel.

use nalgebra::SymmetricEigen;
use num_traits::Zero;
use serde::Serialize;

use crate::domain::{enumerate_cosets, valuation_of_difference, Coset, Params};
use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::rational::{pow, Rational};

pub fn build_operator_matrix(params: &Params) -> RationalMatrix {
    let cosets = enumerate_cosets(params);
    let n = cosets.len();
    let q = params.q();
    let k = params.k() as i64;
    // Exponents range over [-2(m-1) - k, 2(m + k - 1) - k].
    let lo = -2 * (params.m() as i64 - 1) - k;
    let hi = 2 * (params.m() as i64 + k - 1) - k;
    let powers: Vec<Rational> = (lo..=hi).map(|e| pow(q, e)).collect();
    let mut d = RationalMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = valuation_of_difference(&cosets[i], &cosets[j]).expect("distinct cosets");
            let e = 2 * v as i64 - cosets[i].s as i64 - cosets[j].s as i64 - k;
            let w = powers[(e - lo) as usize].clone();
            d.set(i, j, w.clone());
            d.set(j, i, w);
        }
    }
    for i in 0..n {
        let off: Rational = d.row(i).iter().sum();
        d.set(i, i, -off);
    }
    d
}

/// A level-`k` function as values in canonical coset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledFunction {
    values: Vec<Rational>,
}

impl SampledFunction {
    pub fn new(params: &Params, values: Vec<Rational>) -> Result<Self> {
        let expected = params.coset_count();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        Ok(Self { values })
    }

    pub fn from_values(values: Vec<Rational>) -> Self {
        Self { values }
    }

    pub fn constant(params: &Params, c: Rational) -> Self {
        Self { values: vec![c; params.coset_count()] }
    }

    /// Indicator of the coset with index `i`.
    pub fn basis(params: &Params, i: usize) -> Self {
        let mut values = vec![Rational::zero(); params.coset_count()];
        values[i] = Rational::from_integer(1.into());
        Self { values }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The same function viewed one level finer (constant on fibers).
    pub fn lift(&self, params: &Params) -> SampledFunction {
        let q = params.q() as usize;
        let values = self.values.iter().flat_map(|v| std::iter::repeat_n(v.clone(), q)).collect();
        Self { values }
    }

    /// Inverse of [`SampledFunction::lift`]; `None` unless constant on every fiber.
    pub fn restrict(&self, params: &Params) -> Option<SampledFunction> {
        let q = params.q() as usize;
        if !self.values.len().is_multiple_of(q) {
            return None;
        }
        self.values
            .chunks(q)
            .map(|fiber| fiber.iter().all(|v| *v == fiber[0]).then(|| fiber[0].clone()))
            .collect::<Option<Vec<_>>>()
            .map(|values| Self { values })
    }
}

pub fn apply(matrix: &RationalMatrix, f: &SampledFunction) -> Result<SampledFunction> {
    Ok(SampledFunction { values: matrix.mul_vec(&f.values)? })
}

/// `⟨Df, f⟩` under the multiplicative measure, which is uniform (`q^(-k)`) per coset.
pub fn quadratic_form(d: &RationalMatrix, f: &SampledFunction, params: &Params) -> Result<Rational> {
    let df = d.mul_vec(&f.values)?;
    let sum: Rational = df.iter().zip(&f.values).map(|(a, b)| a * b).sum();
    Ok(sum * pow(params.q(), -(params.k() as i64)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Exact, from the rational rank.
    pub kernel_dim: usize,
}

impl Spectrum {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn is_negative_semidefinite(&self, tol: f64) -> bool {
        self.max_eigenvalue() <= tol
    }
}

pub fn spectrum(matrix: &RationalMatrix) -> Result<Spectrum> {
    if !matrix.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(matrix.to_nalgebra()).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let kernel_dim = matrix.rows() - matrix.rank();
    Ok(Spectrum { eigenvalues, kernel_dim })
}

/// Averages a level-`k+1` table over the `q × q` lifts of each level-`k` pair.
pub fn fiber_average(table: &RationalMatrix, params: &Params) -> Result<RationalMatrix> {
    let fine = params.at_level(params.k() + 1)?.coset_count();
    if table.rows() != fine || table.cols() != fine {
        return Err(Error::LevelMismatch { expected: fine, got: table.rows() });
    }
    let q = params.q() as usize;
    let scale = pow(params.q(), -2);
    Ok(RationalMatrix::from_fn(params.coset_count(), params.coset_count(), |i, j| {
        let mut acc = Rational::zero();
        for a in 0..q {
            for b in 0..q {
                acc += table.get(i * q + a, j * q + b);
            }
        }
        acc * &scale
    }))
}

/// Index permutation induced by a map on cosets.
pub fn coset_permutation(params: &Params, map: impl Fn(&Coset) -> Result<Coset>) -> Result<Vec<usize>> {
    let cosets = enumerate_cosets(params);
    let perm = cosets
        .iter()
        .map(|c| {
            let image = map(c)?;
            params.index_of(&image).ok_or_else(|| Error::InvalidParams(format!("image {image:?} is not a coset")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seen = vec![false; perm.len()];
    for &i in &perm {
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParams("map is not a bijection on cosets".into()));
        }
    }
    Ok(perm)
}

/// Whether `M[σ(i), σ(j)] = M[i, j]` for all `i, j`.
pub fn is_invariant_under(matrix: &RationalMatrix, perm: &[usize]) -> bool {
    let n = matrix.rows();
    perm.len() == n && (0..n).all(|i| (0..n).all(|j| matrix.get(perm[i], perm[j]) == matrix.get(i, j)))
}
