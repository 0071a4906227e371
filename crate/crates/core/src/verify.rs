//! Cross-checks and invariant suites, collected into a [`Report`].

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic::{
    b_value_truncated, c_matrix, c_matrix_via_linear_system, make_analytic_params, AnalyticGreen,
};
use crate::appendix::{cancellation_holds, closed_form_cases};
use crate::domain::{
    additive_measure, enumerate_cosets, multiplicative_measure, reflect, rescale_difference, shell_measure,
    unit_multiply, units_below, valuation_of_difference, Params,
};
use crate::error::Result;
use crate::fixtures::reference_matrix;
use crate::matrix::RationalMatrix;
use crate::operator::{
    apply, build_operator_matrix, coset_permutation, fiber_average, is_invariant_under, quadratic_form, spectrum,
    SampledFunction,
};
use crate::oracle::{resolved_pairs, solve_green_with, GreenTable};
use crate::rational::{frac, int, pow, render, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub params: Option<Params>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    fn new(name: &str, params: Option<&Params>, status: Status, witness: Option<Value>) -> Self {
        Self { name: name.to_string(), params: params.copied(), status, witness }
    }

    pub fn pass(name: &str, params: Option<&Params>) -> Self {
        Self::new(name, params, Status::Pass, None)
    }

    pub fn fail(name: &str, params: Option<&Params>, witness: Value) -> Self {
        Self::new(name, params, Status::Fail, Some(witness))
    }

    pub fn skipped(name: &str, params: Option<&Params>, why: &str) -> Self {
        Self::new(name, params, Status::Skipped, Some(json!({ "reason": why })))
    }

    /// Pass if `witness` is `None`.
    pub fn from_witness(name: &str, params: Option<&Params>, witness: Option<Value>) -> Self {
        match witness {
            None => Self::pass(name, params),
            Some(w) => Self::fail(name, params, w),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub grid: Vec<Params>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for c in &self.checks {
            match c.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Skipped => s.skipped += 1,
            }
        }
        s
    }

    pub fn all_passed(&self) -> bool {
        self.summary().fail == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn to_json(&self) -> Value {
        json!({ "grid": self.grid, "checks": self.checks, "summary": self.summary() })
    }
}

/// Operator and Green table at one level, computed once and shared by checks.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub params: Params,
    pub operator: RationalMatrix,
    pub green: GreenTable,
}

impl LevelData {
    pub fn compute(params: &Params) -> Result<Self> {
        let operator = build_operator_matrix(params);
        let green = solve_green_with(params, &operator)?;
        Ok(Self { params: *params, operator, green })
    }
}

fn pair_witness(params: &Params, i: usize, j: usize, extra: Value) -> Value {
    let q = params.q();
    json!({
        "x": params.coset_at(i).compact(q),
        "y": params.coset_at(j).compact(q),
        "detail": extra,
    })
}

/// Oracle differences against the analytic enclosure differences on resolved pairs.
pub fn crosscheck_green(params: &Params, tol: &Rational) -> Result<Check> {
    crosscheck_green_with(&LevelData::compute(params)?.green, tol)
}

pub fn crosscheck_green_with(table: &GreenTable, tol: &Rational) -> Result<Check> {
    const NAME: &str = "oracle-vs-analytic";
    let params = &table.params;
    let pairs = resolved_pairs(params);
    let Some(&(i0, j0)) = pairs.first() else {
        return Ok(Check::skipped(NAME, Some(params), "no resolved pairs at this level"));
    };
    let cosets = enumerate_cosets(params);
    // Each value gets half the budget so differences stay within `tol`.
    let mut model = AnalyticGreen::new(params, tol / int(2))?;
    let reference = model.value(&cosets[i0], &cosets[j0])?;
    let g0 = table.get(i0, j0);
    let mut max_radius = Rational::zero();
    for &(i, j) in &pairs {
        let enclosure = &model.value(&cosets[i], &cosets[j])? - &reference;
        let diff = table.get(i, j) - g0;
        if enclosure.radius > max_radius {
            max_radius = enclosure.radius.clone();
        }
        if !enclosure.contains(&diff) || enclosure.radius > *tol {
            return Ok(Check::fail(
                NAME,
                Some(params),
                pair_witness(
                    params,
                    i,
                    j,
                    json!({
                        "oracle_difference": render(&diff),
                        "analytic_difference": enclosure,
                        "reference": [cosets[i0].compact(params.q()), cosets[j0].compact(params.q())],
                    }),
                ),
            ));
        }
    }
    let mut check = Check::pass(NAME, Some(params));
    check.witness = Some(json!({ "pairs": pairs.len(), "max_radius": render(&max_radius) }));
    Ok(check)
}

fn first_mismatch(a: &RationalMatrix, b: &RationalMatrix) -> Option<Value> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Some(json!({ "shape": [[a.rows(), a.cols()], [b.rows(), b.cols()]] }));
    }
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if a.get(i, j) != b.get(i, j) {
                return Some(json!({ "entry": [i, j], "left": render(a.get(i, j)), "right": render(b.get(i, j)) }));
            }
        }
    }
    None
}

/// The recurrence matrix against the bundled reference table, evaluated at `q`.
pub fn appendix_b_fixture_check(params: &Params) -> Check {
    let name = "c-matrix-reference-table";
    let m = params.m();
    match reference_matrix(params.q(), m) {
        Ok(expected) => Check::from_witness(name, Some(params), first_mismatch(&c_matrix(params), &expected)),
        Err(_) => Check::skipped(name, Some(params), "no reference table for this m"),
    }
}

fn domain_checks(params: &Params) -> Vec<Check> {
    let p = Some(params);
    let cosets = enumerate_cosets(params);
    let q = params.q();
    let mut out = Vec::new();

    let count = cosets.len() == params.m() as usize * (q as usize - 1) * (q as usize).pow(params.k() - 1);
    out.push(Check::from_witness("domain-coset-count", p, (!count).then(|| json!({ "count": cosets.len() }))));

    let mut ultra = None;
    let step = (cosets.len() / 24).max(1);
    'outer: for a in cosets.iter().step_by(step) {
        for b in cosets.iter().step_by(step) {
            for c in cosets.iter().step_by(step) {
                if a == b || b == c || a == c {
                    continue;
                }
                let (ab, bc, ac) = (
                    valuation_of_difference(a, b).unwrap(),
                    valuation_of_difference(b, c).unwrap(),
                    valuation_of_difference(a, c).unwrap(),
                );
                if ab != valuation_of_difference(b, a).unwrap() || ac < ab.min(bc) {
                    ultra = Some(json!([a.compact(q), b.compact(q), c.compact(q)]));
                    break 'outer;
                }
            }
        }
    }
    out.push(Check::from_witness("domain-ultrametric", p, ultra));

    let mut measures = None;
    for s in 0..params.m() {
        let total: Rational = cosets.iter().filter(|c| c.s == s).map(|c| additive_measure(c, params)).sum();
        if total != int(q as i64 - 1) * pow(q, -(s as i64) - 1) {
            measures = Some(json!({ "valuation": s, "additive_total": render(&total) }));
        }
        let shells: Rational = (s..s + params.k()).map(|i| shell_measure(s, i, params).unwrap()).sum();
        if &shells + pow(q, -(s as i64) - params.k() as i64) != int(q as i64 - 1) * pow(q, -(s as i64) - 1) {
            measures = Some(json!({ "valuation": s, "shell_total": render(&shells) }));
        }
    }
    let mult: Rational = cosets.iter().map(|c| multiplicative_measure(c, params)).sum();
    if mult != params.volume() {
        measures = Some(json!({ "multiplicative_total": render(&mult) }));
    }
    out.push(Check::from_witness("domain-measures", p, measures));
    out
}

fn unit_permutations(params: &Params) -> Result<Vec<(u64, Vec<usize>)>> {
    units_below(params)
        .into_iter()
        .map(|u| Ok((u, coset_permutation(params, |c| unit_multiply(c, u, params))?)))
        .collect()
}

fn invariance_witness(matrix: &RationalMatrix, perms: &[(u64, Vec<usize>)]) -> Option<Value> {
    perms.iter().find(|(_, perm)| !is_invariant_under(matrix, perm)).map(|(u, _)| json!({ "unit": u }))
}

/// Every invariant that applies at `level`; fiber checks need `next` (level `k + 1`).
pub fn run_invariant_suite_with(level: &LevelData, next: Option<&LevelData>, spectral_tol: f64) -> Result<Vec<Check>> {
    let params = &level.params;
    let p = Some(params);
    let d = &level.operator;
    let g = &level.green;
    let q = params.q();
    let qp = params.f() == 1;
    let mut out = domain_checks(params);

    // Operator.
    out.push(Check::from_witness("operator-symmetric", p, (!d.is_symmetric()).then(|| json!("asymmetric"))));
    let bad_row = d.row_sums().iter().position(|s| !s.is_zero());
    out.push(Check::from_witness("operator-row-sums", p, bad_row.map(|r| json!({ "row": r }))));

    let unit_perms = if qp { Some(unit_permutations(params)?) } else { None };
    let reflect_perm = if qp { Some(coset_permutation(params, |c| reflect(c, params))?) } else { None };
    match &unit_perms {
        Some(perms) => out.push(Check::from_witness("operator-unit-invariance", p, invariance_witness(d, perms))),
        None => out.push(Check::skipped("operator-unit-invariance", p, "needs f = 1")),
    }
    match &reflect_perm {
        Some(perm) => out.push(Check::from_witness(
            "operator-reflect-invariance",
            p,
            (!is_invariant_under(d, perm)).then(|| json!("not invariant")),
        )),
        None => out.push(Check::skipped("operator-reflect-invariance", p, "needs f = 1")),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (q << 16) ^ ((params.m() as u64) << 8) ^ params.k() as u64);
    let n = params.coset_count();
    let random_fn = |rng: &mut ChaCha8Rng| {
        SampledFunction::from_values((0..n).map(|_| frac(rng.random_range(-50..=50), rng.random_range(1..=9))).collect())
    };
    let mut semidef = None;
    for trial in 0..100 {
        let f = random_fn(&mut rng);
        let form = quadratic_form(d, &f, params)?;
        if form.is_positive() {
            semidef = Some(json!({ "trial": trial, "form": render(&form) }));
            break;
        }
    }
    out.push(Check::from_witness("operator-negative-semidefinite", p, semidef));

    let spec = spectrum(d)?;
    let spectral = if spec.kernel_dim != 1 || !spec.is_negative_semidefinite(spectral_tol) {
        Some(json!({ "kernel_dim": spec.kernel_dim, "max_eigenvalue": spec.max_eigenvalue() }))
    } else {
        None
    };
    out.push(Check::from_witness("operator-spectrum", p, spectral));

    // Green table.
    out.push(Check::from_witness("green-symmetric", p, (!g.matrix.is_symmetric()).then(|| json!("asymmetric"))));
    let max = g.matrix.max_entry().cloned().unwrap_or_default();
    out.push(Check::from_witness("green-max-zero", p, (!max.is_zero()).then(|| json!({ "max": render(&max) }))));
    let residual = g.residual(d)?;
    out.push(Check::from_witness("green-residual", p, first_mismatch(&residual, &RationalMatrix::zeros(n, n))));

    match &unit_perms {
        Some(perms) => out.push(Check::from_witness("green-unit-invariance", p, invariance_witness(&g.matrix, perms))),
        None => out.push(Check::skipped("green-unit-invariance", p, "needs f = 1")),
    }
    match &reflect_perm {
        Some(perm) => out.push(Check::from_witness(
            "green-reflect-invariance",
            p,
            (!is_invariant_under(&g.matrix, perm)).then(|| json!("not invariant")),
        )),
        None => out.push(Check::skipped("green-reflect-invariance", p, "needs f = 1")),
    }
    if qp {
        out.push(Check::from_witness("green-digit-dependence", p, digit_dependence_witness(g)?));
    } else {
        out.push(Check::skipped("green-digit-dependence", p, "needs f = 1"));
    }

    // Levels k and k + 1.
    match next {
        Some(next) => {
            let fine = &next.params;
            let mut local = None;
            for trial in 0..3 {
                let f = random_fn(&mut rng);
                let coarse = apply(d, &f)?;
                let via_fine = apply(&next.operator, &f.lift(params))?.restrict(params);
                if via_fine.as_ref() != Some(&coarse) {
                    local = Some(json!({ "trial": trial }));
                    break;
                }
            }
            out.push(Check::from_witness("operator-locally-constant", Some(fine), local));
            let avg = fiber_average(&next.green.matrix, params)?;
            let diff = avg.sub(&g.matrix)?;
            out.push(Check::from_witness(
                "green-fiber-average",
                Some(fine),
                diff.constant_value().is_none().then(|| json!("difference is not constant")),
            ));
        }
        None => {
            out.push(Check::skipped("operator-locally-constant", p, "level k + 1 not computed"));
            out.push(Check::skipped("green-fiber-average", p, "level k + 1 not computed"));
        }
    }

    out.extend(analytic_checks(params));
    Ok(out)
}

/// `G(y + u(x - y), y) = G(x, y)` for `u ≡ 1 mod p^(m - v(y))`.
fn digit_dependence_witness(g: &GreenTable) -> Result<Option<Value>> {
    let params = &g.params;
    let cosets = enumerate_cosets(params);
    let p = params.p();
    for (j, y) in cosets.iter().enumerate() {
        let step = p.pow(params.m() - y.s);
        for t in 1..=6u64 {
            let u = 1 + t * step;
            for (i, x) in cosets.iter().enumerate().filter(|&(i, _)| i != j) {
                let x2 = rescale_difference(x, y, u, params)?;
                let i2 = params.index_of(&x2).expect("valid coset");
                if g.get(i2, j) != g.get(i, j) {
                    return Ok(Some(pair_witness(params, i, j, json!({ "u": u, "image": x2.compact(params.q()) }))));
                }
            }
        }
    }
    Ok(None)
}

fn analytic_checks(params: &Params) -> Vec<Check> {
    let p = Some(params);
    let ap = make_analytic_params(params);
    let m = params.m();
    let mut out = Vec::new();

    let c = c_matrix(params);
    out.push(Check::from_witness("c-matrix-bisymmetric", p, (!c.is_bisymmetric()).then(|| json!("not bisymmetric"))));
    let mut four_point = None;
    let mu = m as usize;
    for i in 0..mu {
        for j in 0..mu {
            for k in 0..mu {
                let lhs = c.get(i, j) + c.get(j, k) + c.get(k, i);
                let rhs = c.get(j, i) + c.get(k, j) + c.get(i, k);
                if lhs != rhs {
                    four_point = Some(json!([i, j, k]));
                }
            }
        }
    }
    out.push(Check::from_witness("c-matrix-four-point", p, four_point));
    if m >= 2 {
        let w = match c_matrix_via_linear_system(params) {
            Ok(sys) => first_mismatch(&c, &sys),
            Err(e) => Some(json!({ "error": e.to_string() })),
        };
        out.push(Check::from_witness("c-matrix-routes-agree", p, w));
    } else {
        out.push(Check::skipped("c-matrix-routes-agree", p, "linear system needs m >= 2"));
    }
    out.push(appendix_b_fixture_check(params));

    let mut nesting = None;
    'r: for r in 0..m {
        for gap in 1..=3 {
            let mut prev = b_value_truncated(r, r + gap, 1, &ap).expect("valid");
            for terms in 2..=40 {
                let next = b_value_truncated(r, r + gap, terms, &ap).expect("valid");
                if !(next.radius < prev.radius && prev.encloses(&next)) {
                    nesting = Some(json!({ "r": r, "gap": gap, "terms": terms }));
                    break 'r;
                }
                prev = next;
            }
        }
    }
    out.push(Check::from_witness("b-enclosures-nested", p, nesting));

    let symmetric_lambda = (0..m).all(|r| {
        (1..=6).all(|n| crate::analytic::lambda_n(n, r, &ap) == crate::analytic::lambda_n(n, m - 1 - r, &ap))
    });
    out.push(Check::from_witness("lambda-symmetry", p, (!symmetric_lambda).then(|| json!("asymmetric"))));

    let tol = pow(10, -10);
    let cases = match closed_form_cases(&ap, 3, 4, &tol) {
        Ok(cases) => cases.into_iter().find(|c| !c.pass).map(|c| json!(c)),
        Err(e) => Some(json!({ "error": e.to_string() })),
    };
    out.push(Check::from_witness("closed-forms-vs-shell-sums", p, cases));

    let tol = pow(10, -12);
    let cancel = (0..m).find(|&r| !cancellation_holds(r, 0, 3, &ap, &tol).unwrap_or(false));
    out.push(Check::from_witness("lambda-cancellation", p, cancel.map(|r| json!({ "r": r }))));
    out
}

/// Invariant suite at `params`, solving level `k + 1` too.
pub fn run_invariant_suite(params: &Params, spectral_tol: f64) -> Result<Vec<Check>> {
    let level = LevelData::compute(params)?;
    let next = LevelData::compute(&params.at_level(params.k() + 1)?)?;
    run_invariant_suite_with(&level, Some(&next), spectral_tol)
}

/// Eigenvalue slack for the semidefiniteness check.
pub const SPECTRAL_TOL: f64 = 1e-9;

/// Everything for one parameter set.
pub fn verify(params: &Params, tol: &Rational) -> Result<Report> {
    let level = LevelData::compute(params)?;
    let next = LevelData::compute(&params.at_level(params.k() + 1)?)?;
    let mut report = Report { grid: vec![*params], checks: Vec::new() };
    report.extend(run_invariant_suite_with(&level, Some(&next), SPECTRAL_TOL)?);
    report.checks.push(crosscheck_green_with(&level.green, tol)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_clean(report: &Report) {
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }

    #[test]
    fn suite_passes_on_small_cells() {
        for (p, f, m, k) in [(2, 1, 2, 3), (3, 1, 3, 2), (2, 2, 2, 2), (3, 1, 1, 1)] {
            let params = Params::new(p, f, m, k).unwrap();
            let report = verify(&params, &pow(10, -12)).unwrap();
            assert_clean(&report);
            let ring_checks = report
                .checks
                .iter()
                .filter(|c| c.name.contains("unit") || c.name.contains("reflect") || c.name.contains("digit"));
            for c in ring_checks {
                let expected = if f == 1 { Status::Pass } else { Status::Skipped };
                assert_eq!(c.status, expected, "{} at {params}", c.name);
            }
        }
    }

    #[test]
    fn crosscheck_detects_tampering() {
        let params = Params::new(2, 1, 1, 3).unwrap();
        let mut level = LevelData::compute(&params).unwrap();
        let (i, j) = *resolved_pairs(&params).last().unwrap();
        let bumped = level.green.get(i, j) + frac(1, 1000);
        level.green.matrix.set(i, j, bumped);
        let check = crosscheck_green_with(&level.green, &pow(10, -12)).unwrap();
        assert_eq!(check.status, Status::Fail);
        assert!(check.witness.is_some());
    }

    #[test]
    fn crosscheck_skips_without_pairs() {
        let params = Params::new(2, 1, 3, 1).unwrap();
        let check = crosscheck_green(&params, &pow(10, -12)).unwrap();
        assert_eq!(check.status, Status::Skipped);
    }

    #[test]
    fn report_summary_and_json() {
        let mut r = Report::default();
        r.extend([Check::pass("a", None), Check::fail("b", None, json!(1)), Check::skipped("c", None, "x")]);
        assert_eq!(r.summary(), Summary { pass: 1, fail: 1, skipped: 1 });
        assert!(!r.all_passed());
        let v = r.to_json();
        assert_eq!(v["summary"]["fail"], 1);
        assert_eq!(v["checks"][1]["status"], "fail");
    }
}
