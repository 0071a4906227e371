//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_traits::Zero;

use tate_green::analytic::{c_matrix_for, c_matrix_via_linear_system_for, AnalyticGreen, AnalyticParams};
use tate_green::appendix::{cancellation_holds, closed_form_cases};
use tate_green::domain::{valuation_of_difference, Coset, Params};
use tate_green::rational::{frac, pow, Rational};
use tate_green::verify::{
    appendix_b_fixture_check, crosscheck_green_with, run_invariant_suite_with, Check, LevelData, Status, SPECTRAL_TOL,
};

const MAX_DIM: usize = 600;

type Key = (u64, u32, u32, u32);

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn from_checks<'a>(checks: impl IntoIterator<Item = &'a Check>) -> Self {
        let mut total = 0;
        let mut failed = Vec::new();
        for c in checks {
            total += 1;
            if c.status != Status::Pass {
                let at = c.params.map(|p| p.to_string()).unwrap_or_default();
                failed.push(format!("{} [{at}] {:?}", c.name, c.witness));
            }
        }
        let ok = failed.is_empty() && total > 0;
        let detail = if failed.is_empty() {
            format!("{total} checks")
        } else {
            format!("{} of {total} failed; first: {}", failed.len(), failed[0])
        };
        Outcome { ok, detail }
    }

    fn merge(self, other: Outcome) -> Outcome {
        Outcome { ok: self.ok && other.ok, detail: format!("{}; {}", self.detail, other.detail) }
    }
}

fn grid() -> Vec<Params> {
    let mut out = Vec::new();
    for p in [2, 3] {
        for f in [1, 2] {
            for m in 1..=3 {
                for k in 1..=5 {
                    if let Ok(params) = Params::new(p, f, m, k) {
                        if params.coset_count() <= MAX_DIM {
                            out.push(params);
                        }
                    }
                }
            }
        }
    }
    out
}

fn key(p: &Params) -> Key {
    (p.p(), p.f(), p.m(), p.k())
}

fn appendix_b() -> Outcome {
    let checks: Vec<Check> = [2u64, 3, 5]
        .iter()
        .flat_map(|&p| (2..=7).map(move |m| appendix_b_fixture_check(&Params::new(p, 1, m, 1).unwrap())))
        .collect();
    Outcome::from_checks(&checks)
}

fn routes_agree() -> Outcome {
    let mut bad = Vec::new();
    let mut total = 0;
    for q in [2u64, 3, 5, 7] {
        for m in 2..=10 {
            total += 1;
            let ap = AnalyticParams::new(q, m).unwrap();
            match c_matrix_via_linear_system_for(&ap) {
                Ok(c) if c == c_matrix_for(&ap) => {}
                _ => bad.push(format!("q={q} m={m}")),
            }
        }
    }
    Outcome { ok: bad.is_empty(), detail: format!("{total} sizes, mismatches: {bad:?}") }
}

fn by_name<'a>(suites: &'a BTreeMap<Key, Vec<Check>>, names: &'a [&str]) -> impl Iterator<Item = &'a Check> {
    suites.values().flatten().filter(move |c| names.contains(&c.name.as_str()))
}

fn checkpoints(levels: &BTreeMap<Key, LevelData>, tol: &Rational) -> Outcome {
    let mut bad = Vec::new();
    let mut seen = 0;

    // m = 1, p = 3: every resolved pair at distance 1 carries the reference value.
    for level in levels.values().filter(|l| l.params.p() == 3 && l.params.f() == 1 && l.params.m() == 1) {
        let params = &level.params;
        let unit_distance = |&(i, j): &(usize, usize)| valuation_of_difference(&params.coset_at(i), &params.coset_at(j)) == Ok(0);
        let pairs: Vec<_> = tate_green::oracle::resolved_pairs(params).into_iter().filter(unit_distance).collect();
        let (i0, j0) = pairs[0];
        let mut model = AnalyticGreen::new(params, tol / Rational::from_integer(2.into())).unwrap();
        let reference = model.value(&params.coset_at(i0), &params.coset_at(j0)).unwrap();
        for &(i, j) in &pairs {
            let (x, y) = (params.coset_at(i), params.coset_at(j));
            seen += 1;
            let diff = level.green.get(i, j) - level.green.get(i0, j0);
            let enclosure = &model.value(&x, &y).unwrap() - &reference;
            if !diff.is_zero() || !enclosure.contains(&Rational::zero()) {
                bad.push(format!("{params} pair ({i},{j})"));
            }
        }
    }

    // m = 1, p = 2: pairs at distance 2^-1 and 2^-2 differ by exactly 6/5 once k >= 3.
    for level in levels.values().filter(|l| l.params.p() == 2 && l.params.f() == 1 && l.params.m() == 1 && l.params.k() >= 3) {
        let params = &level.params;
        let k = params.k() as usize;
        let digits = |tail: &[u32]| {
            let mut d = vec![0u32; k];
            d[..tail.len()].copy_from_slice(tail);
            Coset::new(0, d)
        };
        let (x, y1, y2) = (digits(&[1]), digits(&[1, 1]), digits(&[1, 0, 1]));
        let at = |c: &Coset| params.index_of(c).unwrap();
        let diff = level.green.get(at(&x), at(&y1)) - level.green.get(at(&x), at(&y2));
        let mut model = AnalyticGreen::new(params, tol / Rational::from_integer(2.into())).unwrap();
        let enclosure = &model.value(&x, &y1).unwrap() - &model.value(&x, &y2).unwrap();
        seen += 1;
        if diff != frac(6, 5) || !enclosure.contains(&frac(6, 5)) || enclosure.radius > *tol {
            bad.push(format!("{params} gap difference {diff}"));
        }
    }
    bad.truncate(5);
    Outcome { ok: bad.is_empty() && seen > 0, detail: format!("{seen} checkpoint pairs, failures: {bad:?}") }
}

fn closed_forms() -> Outcome {
    let tol = pow(10, -10);
    let mut cases = 0;
    let mut bad = Vec::new();
    for q in [2u64, 3, 4, 5] {
        for m in 1..=4 {
            let ap = AnalyticParams::new(q, m).unwrap();
            for case in closed_form_cases(&ap, 4, 6, &tol).unwrap() {
                cases += 1;
                if !case.pass || case.enclosure.radius > tol {
                    bad.push(case.case);
                }
            }
            for r in 0..m {
                for gap in 1..=4 {
                    cases += 1;
                    if !cancellation_holds(r, 0, gap, &ap, &tol).unwrap() {
                        bad.push(format!("cancellation q={q} m={m} r={r} gap={gap}"));
                    }
                }
            }
        }
    }
    bad.truncate(5);
    Outcome { ok: bad.is_empty(), detail: format!("{cases} cases, failures: {bad:?}") }
}

fn report(n: usize, title: &str, started: Instant, outcome: Outcome) -> bool {
    let tag = if outcome.ok { "PASS" } else { "FAIL" };
    println!("{tag} criterion {n}: {title} ({:.1}s) {}", started.elapsed().as_secs_f64(), outcome.detail);
    outcome.ok
}

fn main() -> ExitCode {
    let tol = pow(10, -12);
    let mut all = true;

    let t = Instant::now();
    all &= report(1, "reference C matrices reproduced exactly", t, appendix_b());
    let t = Instant::now();
    all &= report(2, "recurrence and linear system agree", t, routes_agree());

    let t = Instant::now();
    let cells = grid();
    let levels: BTreeMap<Key, LevelData> =
        cells.iter().map(|p| (key(p), LevelData::compute(p).expect("oracle solves"))).collect();
    let mut suites = BTreeMap::new();
    let mut crosschecks = Vec::new();
    for (k, level) in &levels {
        let next = levels.get(&(k.0, k.1, k.2, k.3 + 1));
        suites.insert(*k, run_invariant_suite_with(level, next, SPECTRAL_TOL).expect("suite runs"));
        crosschecks.push(crosscheck_green_with(&level.green, &tol).expect("crosscheck runs"));
    }
    let grid_time = t.elapsed().as_secs_f64();
    println!("grid: {} cells solved and checked in {grid_time:.1}s", cells.len());

    let t = Instant::now();
    all &= report(
        3,
        "oracle residual, symmetry and max-zero are exact",
        t,
        Outcome::from_checks(by_name(&suites, &["green-residual", "green-symmetric", "green-max-zero"])),
    );
    all &= report(
        4,
        "fiber averages differ by a constant",
        t,
        Outcome::from_checks(by_name(&suites, &["green-fiber-average"]).filter(|c| c.status != Status::Skipped)),
    );
    all &= report(
        5,
        "oracle differences inside analytic enclosures",
        t,
        Outcome::from_checks(crosschecks.iter().filter(|c| c.status != Status::Skipped)).merge(checkpoints(&levels, &tol)),
    );
    all &= report(
        6,
        "unit and reflection invariance for f = 1",
        t,
        Outcome::from_checks(
            by_name(&suites, &["green-unit-invariance", "green-reflect-invariance", "operator-unit-invariance", "operator-reflect-invariance"])
                .filter(|c| c.params.is_some_and(|p| p.f() == 1)),
        ),
    );
    let t7 = Instant::now();
    all &= report(7, "closed forms inside shell sums, l-independent combination", t7, closed_forms());
    all &= report(
        8,
        "kernel is one-dimensional, spectrum non-positive",
        t,
        Outcome::from_checks(by_name(&suites, &["operator-spectrum"])),
    );

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
