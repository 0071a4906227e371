//! `D log_q d(·, y)` and `D d(·, y)^n` at a point `x`, two ways.
//!
//! The closed forms are checked against a direct sum over the shells
//! `{z : v(z) = v(y), v(z - y) = t}`, each weighted by its Haar measure and
//! the kernel `|x| / |z - x|²`. The shell sums are truncated at depth `N` and
//! the remainder is bounded by an exact geometric series; they never reuse the
//! closed-form algebra.
//!
//! Indices: `i = v(x)`, `j = v(y)`, and when `i = j = r`, `ℓ = v(x - y)`.

use num_traits::Zero;
use serde::Serialize;

use crate::analytic::{db_closed_form, lambda_n, AnalyticParams};
use crate::error::{Error, Result};
use crate::interval::BoundedValue;
use crate::rational::{int, pow, render, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShellKind {
    Log,
    Power(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShellSumSpec {
    pub kind: ShellKind,
    pub i: u32,
    pub j: u32,
    pub l: u32,
    /// Shells `t < depth` are summed explicitly.
    pub depth: u32,
}

fn check_indices(i: u32, j: u32, l: u32, ap: &AnalyticParams) -> Result<()> {
    if i >= ap.m || j >= ap.m {
        return Err(Error::InvalidParams(format!("valuations ({i}, {j}) must lie below m = {}", ap.m)));
    }
    if i == j && l < i {
        return Err(Error::LevelBelowValuation { valuation: i, level: l });
    }
    Ok(())
}

fn qi(ap: &AnalyticParams) -> Rational {
    int(ap.q as i64)
}

/// Closed form of `D log_q d(x, y)`.
pub fn d_log_closed(i: u32, j: u32, l: u32, ap: &AnalyticParams) -> Result<Rational> {
    check_indices(i, j, l, ap)?;
    let q = qi(ap);
    if i != j {
        return Ok(-pow(ap.q, -(i.abs_diff(j) as i64)) / (&q - int(1)));
    }
    Ok(-(int(1) / (&q - int(1))) - ap.u(j) / &q * int((l - j) as i64))
}

/// Closed form of `D d(x, y)^n`, `n ≥ 1`.
pub fn d_power_closed(n: u32, i: u32, j: u32, l: u32, ap: &AnalyticParams) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidParams("power must be at least 1".into()));
    }
    check_indices(i, j, l, ap)?;
    let q = qi(ap);
    let one = int(1);
    let sep = pow(ap.q, -(i.abs_diff(j) as i64));
    let ni = n as i64;
    let qn = pow(ap.q, ni);
    if i != j {
        return Ok(if n == 1 {
            -sep / (&q + &one)
        } else {
            -(&qn - &one) / (pow(ap.q, ni + 1) - &one) * sep
        });
    }
    let g = (l - j) as i64;
    let u = ap.u(j);
    if n == 1 {
        return Ok(-(&one / (&q + &one)) - u / &q * (&one - pow(ap.q, -g)) + (&q - &one) / &q * int(g));
    }
    let qn1 = pow(ap.q, ni - 1);
    let first = (&qn1 - &one / &q) / (&qn1 - &one);
    let second = u / &q * (&one - pow(ap.q, -ni * g));
    let third = (&q + &one) * (&qn - &one) * (&qn - &one) / (&q * (&qn1 - &one) * (pow(ap.q, ni + 1) - &one))
        * pow(ap.q, (1 - ni) * g);
    Ok(first - second - third)
}

/// `Σ_{t ≥ s} x^t`.
fn geometric_tail(x: &Rational, s: u32) -> Rational {
    num_traits::pow(x.clone(), s as usize) / (int(1) - x)
}

/// `Σ_{t ≥ s} t x^t = x^s (s - (s-1) x) / (1 - x)²`.
fn weighted_tail(x: &Rational, s: u32) -> Rational {
    let one_minus = int(1) - x;
    num_traits::pow(x.clone(), s as usize) * (int(s as i64) - int(s as i64 - 1) * x) / (&one_minus * &one_minus)
}

/// Independent enclosure of the quantity the closed forms compute.
pub fn shell_sum_reference(spec: &ShellSumSpec, ap: &AnalyticParams) -> Result<BoundedValue> {
    let ShellSumSpec { kind, i, j, l, depth } = *spec;
    check_indices(i, j, l, ap)?;
    if depth == 0 {
        return Err(Error::InvalidParams("depth must be at least 1".into()));
    }
    if let ShellKind::Power(0) = kind {
        return Err(Error::InvalidParams("power must be at least 1".into()));
    }
    let q = ap.q;
    let qm1 = int(q as i64 - 1);
    let inv_q = pow(q, -1);
    // Integrand as a function of the exponent `e` in `d = q^(-e)`.
    let g = |e: i64| -> Rational {
        match kind {
            ShellKind::Log => int(-e),
            ShellKind::Power(n) => pow(q, -e * n as i64),
        }
    };
    // Haar measure of the shell at depth `t` around a point of valuation `base`.
    let shell = |base: u32, t: u32| -> Rational {
        if t == base {
            int(q as i64 - 2) * pow(q, -(base as i64) - 1)
        } else {
            &qm1 * pow(q, -(t as i64) - 1)
        }
    };

    if i != j {
        // Only z in the shells of y move d(z, y) away from 1; there |z - x| = max(|x|, |y|).
        let kernel = pow(q, -(i as i64)) / num_traits::pow(pow(q, -(i.min(j) as i64)), 2);
        let end = depth.max(j + 1);
        let mut center = Rational::zero();
        for t in j..end {
            center += (g((t - j) as i64) - g(0)) * &kernel * shell(j, t);
        }
        // |g(e) - g(0)| ≤ e for log and ≤ 1 for powers; e = t - j ≤ t.
        let radius = match kind {
            ShellKind::Log => &kernel * &qm1 * &inv_q * weighted_tail(&inv_q, end),
            ShellKind::Power(_) => &kernel * &qm1 * &inv_q * geometric_tail(&inv_q, end),
        };
        return Ok(BoundedValue::new(center, radius));
    }

    let r = i;
    let fx = g((l - r) as i64);
    let mut center = Rational::zero();
    // z at other valuations: d(z, y) = 1.
    for s in (0..ap.m).filter(|&s| s != r) {
        let kernel = pow(q, -(r as i64)) / num_traits::pow(pow(q, -(s.min(r) as i64)), 2);
        center += (g(0) - &fx) * kernel * &qm1 * pow(q, -(s as i64) - 1);
    }
    // Shells of y closer than x: v(z - x) = t.
    for t in r..l {
        center += (g((t - r) as i64) - &fx) * pow(q, 2 * t as i64 - r as i64) * shell(r, t);
    }
    // The shell containing x contributes nothing; beyond it v(z - x) = ℓ.
    let kernel = pow(q, 2 * l as i64 - r as i64);
    let end = depth.max(l + 1);
    for u in l + 1..end {
        center += (g((u - r) as i64) - &fx) * &kernel * &qm1 * pow(q, -(u as i64) - 1);
    }
    // |g(u - r) - g(ℓ - r)| ≤ u - ℓ ≤ u for log and ≤ 1 for powers.
    let radius = match kind {
        ShellKind::Log => &kernel * &qm1 * &inv_q * weighted_tail(&inv_q, end),
        ShellKind::Power(_) => &kernel * &qm1 * &inv_q * geometric_tail(&inv_q, end),
    };
    Ok(BoundedValue::new(center, radius))
}

/// Shell sum with the smallest depth (doubling) whose radius is at most `tol`.
pub fn shell_sum_to_tolerance(
    kind: ShellKind,
    i: u32,
    j: u32,
    l: u32,
    ap: &AnalyticParams,
    tol: &Rational,
) -> Result<BoundedValue> {
    if *tol <= Rational::zero() {
        return Err(Error::NonPositiveTolerance);
    }
    let mut depth = 8;
    loop {
        let v = shell_sum_reference(&ShellSumSpec { kind, i, j, l, depth }, ap)?;
        if v.radius <= *tol {
            return Ok(v);
        }
        depth *= 2;
    }
}

/// `λ₀ D log_q d + Σ_{n ≤ N} λ_n D dⁿ`, enclosing `D B` at `x`.
///
/// The tail uses `λ_n ≤ q ρⁿ` and `|D dⁿ| ≤ 8` for `n ≥ 2`.
pub fn combined_db(i: u32, j: u32, l: u32, terms: u32, ap: &AnalyticParams) -> Result<BoundedValue> {
    if terms == 0 {
        return Err(Error::InvalidParams("the first power term is unbounded in ℓ and must be summed".into()));
    }
    let mut center = &ap.lambda0 * d_log_closed(i, j, l, ap)?;
    for n in 1..=terms {
        center += lambda_n(n, j, ap) * d_power_closed(n, i, j, l, ap)?;
    }
    let rho = ap.rho(j);
    let radius = int(8) * ap.lambda_bound() * geometric_tail(&rho, terms + 1);
    Ok(BoundedValue::new(center, radius))
}

pub fn combined_db_to_tolerance(i: u32, j: u32, l: u32, ap: &AnalyticParams, tol: &Rational) -> Result<BoundedValue> {
    if *tol <= Rational::zero() {
        return Err(Error::NonPositiveTolerance);
    }
    let rho = ap.rho(j);
    let mut terms = 1;
    while int(8) * ap.lambda_bound() * geometric_tail(&rho, terms + 1) > *tol {
        terms += 1;
    }
    combined_db(i, j, l, terms, ap)
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub closed_form: String,
    pub enclosure: BoundedValue,
    pub pass: bool,
}

/// Closed form vs shell sum for every `(i, j, gap, kind)` in the grid.
pub fn closed_form_cases(ap: &AnalyticParams, max_gap: u32, max_power: u32, tol: &Rational) -> Result<Vec<CaseReport>> {
    let mut out = Vec::new();
    for i in 0..ap.m {
        for j in 0..ap.m {
            let gaps = if i == j { 0..=max_gap } else { 0..=0 };
            for gap in gaps {
                let l = j + gap;
                let kinds = std::iter::once(ShellKind::Log).chain((1..=max_power).map(ShellKind::Power));
                for kind in kinds {
                    let closed = match kind {
                        ShellKind::Log => d_log_closed(i, j, l, ap)?,
                        ShellKind::Power(n) => d_power_closed(n, i, j, l, ap)?,
                    };
                    let enclosure = shell_sum_to_tolerance(kind, i, j, l, ap, tol)?;
                    let label = match kind {
                        ShellKind::Log => "log".to_string(),
                        ShellKind::Power(n) => format!("power({n})"),
                    };
                    out.push(CaseReport {
                        case: format!("q={} m={} i={i} j={j} gap={gap} {label}", ap.q, ap.m),
                        closed_form: render(&closed),
                        pass: enclosure.contains(&closed),
                        enclosure,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The λ-weighted sum at two gaps overlaps, and encloses the closed form of `D B`.
pub fn cancellation_holds(r: u32, gap_a: u32, gap_b: u32, ap: &AnalyticParams, tol: &Rational) -> Result<bool> {
    let a = combined_db_to_tolerance(r, r, r + gap_a, ap, tol)?;
    let b = combined_db_to_tolerance(r, r, r + gap_b, ap, tol)?;
    let target = db_closed_form(r, r, ap);
    Ok(a.overlaps(&b) && a.contains(&target) && b.contains(&target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn ap(q: u64, m: u32) -> AnalyticParams {
        AnalyticParams::new(q, m).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(d_log_closed(0, 1, 0, &ap(3, 2)).unwrap(), frac(-1, 6));
        assert_eq!(d_log_closed(1, 1, 1, &ap(3, 3)).unwrap(), frac(-1, 2));
        assert_eq!(d_log_closed(0, 0, 2, &ap(2, 1)).unwrap(), int(-3));
        assert_eq!(d_power_closed(1, 0, 1, 0, &ap(3, 2)).unwrap(), frac(-1, 12));
        assert_eq!(d_power_closed(2, 0, 0, 0, &ap(2, 1)).unwrap(), frac(-3, 7));
        assert!(d_log_closed(1, 1, 0, &ap(2, 2)).is_err());
        assert!(d_power_closed(0, 0, 0, 0, &ap(2, 1)).is_err());
    }

    #[test]
    fn off_diagonal_limit() {
        let a = ap(3, 3);
        let lim = pow(3, -2);
        let v = d_power_closed(40, 0, 1, 0, &a).unwrap();
        assert!(crate::rational::abs(&(v + &lim)) < frac(1, 1_000_000));
    }

    #[test]
    fn shell_sums_enclose_closed_forms() {
        let tol = frac(1, 10_i64.pow(10));
        for (q, m) in [(2, 1), (3, 2), (4, 3), (5, 2)] {
            let cases = closed_form_cases(&ap(q, m), 3, 4, &tol).unwrap();
            assert!(!cases.is_empty());
            for c in cases {
                assert!(c.pass, "{}", c.case);
                assert!(c.enclosure.radius <= tol);
            }
        }
    }

    #[test]
    fn power_one_example_at_depth_60() {
        let a = ap(3, 2);
        let v = shell_sum_reference(&ShellSumSpec { kind: ShellKind::Power(1), i: 1, j: 1, l: 2, depth: 60 }, &a).unwrap();
        assert!(v.contains(&d_power_closed(1, 1, 1, 2, &a).unwrap()));
    }

    #[test]
    fn cancellation() {
        let tol = frac(1, 10_i64.pow(12));
        for (q, m) in [(2, 1), (2, 3), (3, 2), (5, 4)] {
            let a = ap(q, m);
            for r in 0..m {
                assert!(cancellation_holds(r, 0, 3, &a, &tol).unwrap());
                assert!(cancellation_holds(r, 1, 2, &a, &tol).unwrap());
            }
            for i in 0..m {
                for j in (0..m).filter(|&j| j != i) {
                    let v = combined_db_to_tolerance(i, j, j, &a, &tol).unwrap();
                    assert!(v.contains(&db_closed_form(i, j, &a)));
                }
            }
        }
    }

}
