//! The explicit decomposition `G = B + C`.
//!
//! `B` depends on the common valuation `r` and the gap `ℓ - r` and is a power
//! series in `d = q^(r-ℓ)`; it vanishes across different valuations. `C` is an
//! `m × m` matrix indexed by the two valuations.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::domain::{valuation_of_difference, Coset, Params};
use crate::error::{Error, Result};
use crate::interval::BoundedValue;
use crate::matrix::RationalMatrix;
use crate::rational::{int, pow, Rational};

/// Everything the series and the recurrence need, exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyticParams {
    pub q: u64,
    pub m: u32,
    pub lambda0: Rational,
    /// `U(r) = q^(-r) + q^(r+1-m)`.
    pub u: Vec<Rational>,
    /// `Λ_i = 1 + 1/q - q^(-i-1) - q^(i-m)`.
    pub big_lambda: Vec<Rational>,
}

impl AnalyticParams {
    pub fn new(q: u64, m: u32) -> Result<Self> {
        if q < 2 || m == 0 {
            return Err(Error::InvalidParams(format!("need q >= 2 and m >= 1 (got q={q}, m={m})")));
        }
        let (qi, mi) = (q as i64, m as i64);
        let lambda0 = Rational::new((qi * (qi - 1)).into(), (qi + 1).into());
        let u = (0..mi).map(|r| pow(q, -r) + pow(q, r + 1 - mi)).collect();
        let big_lambda = (0..mi).map(|i| int(1) + pow(q, -1) - pow(q, -i - 1) - pow(q, i - mi)).collect();
        Ok(Self { q, m, lambda0, u, big_lambda })
    }

    pub fn u(&self, r: u32) -> &Rational {
        &self.u[r as usize]
    }

    /// `ρ = U(r) / (q + 1)`, the geometric ratio of the `λ_n` bound.
    pub fn rho(&self, r: u32) -> Rational {
        self.u(r) / int(self.q as i64 + 1)
    }

    /// `λ₀ (q+1)/(q-1)`, which equals `q`.
    pub fn lambda_bound(&self) -> Rational {
        &self.lambda0 * Rational::new((self.q as i64 + 1).into(), (self.q as i64 - 1).into())
    }
}

pub fn make_analytic_params(params: &Params) -> AnalyticParams {
    AnalyticParams::new(params.q(), params.m()).expect("validated params")
}

/// `λ_n(r) = U^n (q^(n+1) - 1) / ((q-1)(q+1)^n (q^n - 1)) · λ₀` for `n ≥ 1`.
pub fn lambda_n(n: u32, r: u32, ap: &AnalyticParams) -> Rational {
    assert!(n >= 1, "λ_n needs n ≥ 1");
    let q = ap.q;
    let n = n as i64;
    let num = num_traits::pow(ap.u(r).clone(), n as usize) * (pow(q, n + 1) - int(1));
    let den = int(q as i64 - 1) * pow(q + 1, n) * (pow(q, n) - int(1));
    num / den * &ap.lambda0
}

/// Upper bound for `Σ_{n>N} λ_n(r) |dⁿ - 1|`, doubled.
pub fn b_tail_radius(r: u32, terms: u32, ap: &AnalyticParams) -> Rational {
    let rho = ap.rho(r);
    int(2) * ap.lambda_bound() * num_traits::pow(rho.clone(), terms as usize + 1) / (int(1) - rho)
}

/// `B` at common valuation `r` and gap `ℓ - r`, summed to `terms` terms.
pub fn b_value_truncated(r: u32, l: u32, terms: u32, ap: &AnalyticParams) -> Result<BoundedValue> {
    if l < r {
        return Err(Error::LevelBelowValuation { valuation: r, level: l });
    }
    let gap = (l - r) as i64;
    if gap == 0 {
        return Ok(BoundedValue::exact(Rational::zero()));
    }
    let d = pow(ap.q, -gap);
    let mut center = -&ap.lambda0 * int(gap);
    let mut dn = Rational::one();
    for n in 1..=terms {
        dn *= &d;
        center += lambda_n(n, r, ap) * (&dn - int(1));
    }
    Ok(BoundedValue::new(center, b_tail_radius(r, terms, ap)))
}

/// Fewest terms whose tail radius is at most `tol`.
pub fn terms_for(r: u32, tol: &Rational, ap: &AnalyticParams) -> Result<u32> {
    if *tol <= Rational::zero() {
        return Err(Error::NonPositiveTolerance);
    }
    let rho = ap.rho(r);
    let mut bound = int(2) * ap.lambda_bound() * &rho / (int(1) - &rho);
    let mut n = 0;
    while bound > *tol {
        bound *= &rho;
        n += 1;
    }
    Ok(n)
}

/// `B(x, y)` for valuations `i = v(x)`, `j = v(y)` and `ℓ = v(x - y)`.
pub fn b_value(i: u32, j: u32, l: u32, ap: &AnalyticParams, tol: &Rational) -> Result<BoundedValue> {
    if *tol <= Rational::zero() {
        return Err(Error::NonPositiveTolerance);
    }
    if i != j {
        return Ok(BoundedValue::exact(Rational::zero()));
    }
    if l < i {
        return Err(Error::LevelBelowValuation { valuation: i, level: l });
    }
    b_value_truncated(i, l, terms_for(i, tol, ap)?, ap)
}

/// `C` by the downward recurrence anchored at `c_{m-1,0} = 0`.
pub fn c_matrix(params: &Params) -> RationalMatrix {
    c_matrix_for(&make_analytic_params(params))
}

pub fn c_matrix_for(ap: &AnalyticParams) -> RationalMatrix {
    let m = ap.m as usize;
    let lam = &ap.big_lambda;
    let mi = int(ap.m as i64);
    let mut c = vec![Rational::zero(); m];
    if m >= 2 {
        c[m - 2] = &c[m - 1] - int(ap.q as i64) / (&mi * &lam[m - 2]);
    }
    for i in (0..m.saturating_sub(2)).rev() {
        c[i] = (&lam[i] + &lam[i + 2]) / &lam[i] * &c[i + 1] - &lam[i + 2] / &lam[i] * &c[i + 2]
            - int(ap.q as i64 - 1) / (&mi * &lam[i]);
    }
    RationalMatrix::from_fn(m, m, |i, j| {
        let (hi, lo) = (i.max(j), i.min(j));
        &c[hi] + &c[m - 1 - lo] - &c[m - 1]
    })
}

/// `P` with `p_ij = (1 - 1/q) q^(-|i-j|)`.
fn kms(ap: &AnalyticParams) -> RationalMatrix {
    let m = ap.m as usize;
    let w = int(1) - pow(ap.q, -1);
    RationalMatrix::from_fn(m, m, |i, j| &w * pow(ap.q, -(i.abs_diff(j) as i64)))
}

/// Coefficient matrix `P - Λ` of the linear system for `C`.
pub fn c_system_matrix(ap: &AnalyticParams) -> RationalMatrix {
    let mut a = kms(ap);
    for i in 0..ap.m as usize {
        let v = a.get(i, i) - &ap.big_lambda[i];
        a.set(i, i, v);
    }
    a
}

/// Right-hand side `(P Λ⁻¹ - J/m) / (1 - 1/q)`, entrywise `-DB_ij - 1/V`.
pub fn c_system_rhs(ap: &AnalyticParams) -> RationalMatrix {
    let p = kms(ap);
    let w = int(1) - pow(ap.q, -1);
    let mi = int(ap.m as i64);
    RationalMatrix::from_fn(ap.m as usize, ap.m as usize, |i, j| {
        (p.get(i, j) / &ap.big_lambda[j] - int(1) / &mi) / &w
    })
}

/// `C` from the linear system, symmetrized and anchored at `c_{m-1,0} = 0`.
pub fn c_matrix_via_linear_system(params: &Params) -> Result<RationalMatrix> {
    c_matrix_via_linear_system_for(&make_analytic_params(params))
}

pub fn c_matrix_via_linear_system_for(ap: &AnalyticParams) -> Result<RationalMatrix> {
    if ap.m < 2 {
        return Err(Error::Degenerate);
    }
    let m = ap.m as usize;
    let a = c_system_matrix(ap);
    let rhs = c_system_rhs(ap);
    // The rows of P - Λ sum to zero, so one equation is redundant; replace it by the pin.
    let mut pinned = a.clone();
    let mut pinned_rhs = rhs.clone();
    for j in 0..m {
        pinned.set(m - 1, j, if j == m - 1 { int(1) } else { int(0) });
        pinned_rhs.set(m - 1, j, int(0));
    }
    let c0 = pinned.solve(&pinned_rhs)?;
    let w: Vec<Rational> = (0..m).map(|j| c0.get(j, 0) - c0.get(0, j)).collect();
    let c = RationalMatrix::from_fn(m, m, |i, j| c0.get(i, j) + &w[j]);
    if !c.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if !a.mul(&c)?.sub(&rhs)?.is_zero() {
        return Err(Error::Singular);
    }
    Ok(c)
}

/// `(DB)_{ij} = -q^(1-|i-j|) / (q + 1 - q^(-j) - q^(j+1-m))`.
pub fn db_closed_form(i: u32, j: u32, ap: &AnalyticParams) -> Rational {
    let q = ap.q;
    let den = int(q as i64 + 1) - pow(q, -(j as i64)) - pow(q, j as i64 + 1 - ap.m as i64);
    -pow(q, 1 - i.abs_diff(j) as i64) / den
}

pub fn analytic_green(x: &Coset, y: &Coset, params: &Params, tol: &Rational) -> Result<BoundedValue> {
    AnalyticGreen::new(params, tol.clone())?.value(x, y)
}

/// `B + C` with the `C` matrix and the per-`(r, gap)` enclosures cached.
#[derive(Debug, Clone)]
pub struct AnalyticGreen {
    pub ap: AnalyticParams,
    pub c: RationalMatrix,
    tol: Rational,
    b_cache: HashMap<(u32, u32), BoundedValue>,
}

impl AnalyticGreen {
    pub fn new(params: &Params, tol: Rational) -> Result<Self> {
        if tol <= Rational::zero() {
            return Err(Error::NonPositiveTolerance);
        }
        let ap = make_analytic_params(params);
        let c = c_matrix_for(&ap);
        Ok(Self { ap, c, tol, b_cache: HashMap::new() })
    }

    pub fn value(&mut self, x: &Coset, y: &Coset) -> Result<BoundedValue> {
        let l = valuation_of_difference(x, y)?;
        let c = self.c.get(x.s as usize, y.s as usize).clone();
        if x.s != y.s {
            return Ok(BoundedValue::exact(c));
        }
        let key = (x.s, l - x.s);
        let b = match self.b_cache.get(&key) {
            Some(b) => b.clone(),
            None => {
                let b = b_value(x.s, y.s, l, &self.ap, &self.tol)?;
                self.b_cache.insert(key, b.clone());
                b
            }
        };
        Ok(b.shift(&c))
    }
}
