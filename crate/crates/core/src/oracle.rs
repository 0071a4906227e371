//! Exact Green's function of the level-`k` operator.
//!
//! The solve targets `D G = q^k I - J/V` together with zero mean in every
//! column. Since `D` has kernel exactly the constants, `S = D + J` is
//! invertible and `G = S⁻¹ (q^k I - J/V)` is that zero-mean solution.

use serde::Serialize;

use crate::domain::{enumerate_cosets, valuation_of_difference, Coset, Params};
use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::operator::build_operator_matrix;
use crate::rational::{pow, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Largest entry is exactly 0.
    MaxZero,
    /// Entry at this index pair is exactly 0.
    Anchored(usize, usize),
    /// Raw zero-mean solution.
    ZeroMean,
}

impl Normalization {
    pub fn label(&self) -> String {
        match self {
            Normalization::MaxZero => "max-zero".into(),
            Normalization::Anchored(i, j) => format!("anchored({i},{j})"),
            Normalization::ZeroMean => "zero-mean".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreenTable {
    pub params: Params,
    pub matrix: RationalMatrix,
    pub normalization: Normalization,
}

impl GreenTable {
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        self.matrix.get(i, j)
    }

    pub fn value(&self, x: &Coset, y: &Coset) -> Option<&Rational> {
        Some(self.matrix.get(self.params.index_of(x)?, self.params.index_of(y)?))
    }

    /// `q^k I - J/V`, the discrete right-hand side.
    pub fn source(params: &Params) -> RationalMatrix {
        let n = params.coset_count();
        let delta = pow(params.q(), params.k() as i64);
        let mean = params.volume().recip();
        RationalMatrix::from_fn(n, n, |i, j| if i == j { &delta - &mean } else { -mean.clone() })
    }

    /// `D G - (q^k I - J/V)`, exactly.
    pub fn residual(&self, d: &RationalMatrix) -> Result<RationalMatrix> {
        d.mul(&self.matrix)?.sub(&Self::source(&self.params))
    }
}

pub fn solve_green(params: &Params) -> Result<GreenTable> {
    solve_green_with(params, &build_operator_matrix(params))
}

/// As [`solve_green`] with a prebuilt operator matrix.
pub fn solve_green_with(params: &Params, d: &RationalMatrix) -> Result<GreenTable> {
    let n = params.coset_count();
    if d.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.rows() });
    }
    let s = d.shift(&Rational::from_integer(1.into()));
    let mut g = s.solve(&GreenTable::source(params))?;
    if !g.is_symmetric() {
        g = symmetrize_columns(&g).ok_or(Error::NotSymmetric)?;
    }
    normalize(&GreenTable { params: *params, matrix: g, normalization: Normalization::ZeroMean }, Normalization::MaxZero)
}

/// Adds a constant to each column so the result is symmetric, if possible.
fn symmetrize_columns(g: &RationalMatrix) -> Option<RationalMatrix> {
    let n = g.rows();
    let shift: Vec<Rational> = (0..n).map(|j| g.get(j, 0) - g.get(0, j)).collect();
    let fixed = RationalMatrix::from_fn(n, n, |i, j| g.get(i, j) + &shift[j]);
    fixed.is_symmetric().then_some(fixed)
}

pub fn normalize(table: &GreenTable, mode: Normalization) -> Result<GreenTable> {
    let n = table.matrix.rows();
    let offset = match mode {
        Normalization::MaxZero => table.matrix.max_entry().cloned().unwrap_or_default(),
        Normalization::Anchored(i, j) => {
            if i >= n || j >= n {
                return Err(Error::AnchorOutOfRange(i, j));
            }
            table.matrix.get(i, j).clone()
        }
        Normalization::ZeroMean => {
            let total: Rational = table.matrix.entries().iter().sum();
            total / Rational::from_integer(((n * n) as i64).into())
        }
    };
    Ok(GreenTable { params: table.params, matrix: table.matrix.shift(&-offset), normalization: mode })
}

/// Whether level `k` already pins down the value of `G(x, y)`: `k ≥ (ℓ - r) + m`.
pub fn is_resolved(x: &Coset, y: &Coset, params: &Params) -> bool {
    match valuation_of_difference(x, y) {
        Ok(l) => params.k() >= l - x.s.min(y.s) + params.m(),
        Err(_) => false,
    }
}

/// Resolved ordered pairs `(x, y)` as canonical indices.
pub fn resolved_pairs(params: &Params) -> Vec<(usize, usize)> {
    let cosets = enumerate_cosets(params);
    let n = cosets.len();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && is_resolved(&cosets[i], &cosets[j], params))
        .collect()
}

/// A pair resolved at every level `≥ m + 1`, used to cancel the additive constant.
pub fn reference_pair(params: &Params) -> (Coset, Coset) {
    let x = Coset::new(0, vec![1]);
    let y = if params.m() > 1 {
        Coset::new(params.m() - 1, vec![1])
    } else if params.q() > 2 {
        Coset::new(0, vec![2])
    } else {
        Coset::new(0, vec![1, 1])
    };
    (x, y)
}

/// `G_k(x, y) - G_k(x₀, y₀)` at the first level where two consecutive levels agree.
pub fn stabilized_value(x: &Coset, y: &Coset, params: &Params, k_max: u32) -> Result<Rational> {
    if x == y {
        return Err(Error::UnresolvedValuation);
    }
    let (x0, y0) = reference_pair(params);
    let start = params.k().max(x.level()).max(y.level()).max(y0.level());
    let mut previous: Option<Rational> = None;
    for k in start..=k_max {
        let level = params.at_level(k)?;
        let table = solve_green(&level)?;
        let at = |c: &Coset| {
            level.index_of(&c.lift_with_zeros(k)).ok_or_else(|| Error::InvalidParams(format!("{c:?} is not a coset")))
        };
        let value = table.get(at(x)?, at(y)?) - table.get(at(&x0)?, at(&y0)?);
        if previous.as_ref() == Some(&value) {
            return Ok(value);
        }
        previous = Some(value);
    }
    Err(Error::NotStabilized(k_max))
}
