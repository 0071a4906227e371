//! Closed-form shell integrals against brute-force shell sums with certified tails.

use tate_green::analytic::{db_closed_form, AnalyticParams};
use tate_green::appendix::{cancellation_holds, closed_form_cases, combined_db_to_tolerance};
use tate_green::rational::{pow, to_f64};

fn main() -> tate_green::Result<()> {
    let ap = AnalyticParams::new(2, 3)?;
    let tol = pow(10, -10);
    let cases = closed_form_cases(&ap, 2, 3, &tol)?;
    for case in cases.iter().take(12) {
        println!("{:<36} closed {:>12}  {}", case.case, case.closed_form, if case.pass { "inside" } else { "OUTSIDE" });
    }
    println!("... {} cases, {} inside", cases.len(), cases.iter().filter(|c| c.pass).count());

    // The weighted sum is the same at every distance: the log singularity is exactly cancelled.
    for gap in 0..4 {
        let v = combined_db_to_tolerance(1, 1, 1 + gap, &ap, &tol)?;
        println!("gap {gap}: {:.12}", to_f64(&v.center));
    }
    println!("closed form {:.12}", to_f64(&db_closed_form(1, 1, &ap)));
    println!("cancellation holds: {}", cancellation_holds(1, 0, 3, &ap, &tol)?);
    Ok(())
}
