//! The analytic side: C matrix, rigorous B enclosures and a comparison with the oracle.

use tate_green::analytic::{b_value, c_matrix, make_analytic_params, AnalyticGreen};
use tate_green::domain::Params;
use tate_green::oracle::{resolved_pairs, solve_green};
use tate_green::rational::{pow, to_f64};

fn main() -> tate_green::Result<()> {
    let params = Params::new(3, 1, 3, 4)?;
    let ap = make_analytic_params(&params);
    let tol = pow(10, -12);

    println!("C for q = {}, m = {}:\n{}", ap.q, ap.m, c_matrix(&params));
    for l in 1..5 {
        let b = b_value(1, 1, l, &ap, &tol)?;
        println!("B(v=1, v=1, l={l}) ~ {:.15} +- {:.1e}", to_f64(&b.center), to_f64(&b.radius));
    }

    let oracle = solve_green(&params)?;
    let mut model = AnalyticGreen::new(&params, tol)?;
    let pairs = resolved_pairs(&params);
    let (i0, j0) = pairs[0];
    let reference = model.value(&params.coset_at(i0), &params.coset_at(j0))?;
    let mut worst = 0.0f64;
    for &(i, j) in &pairs {
        let enclosure = &model.value(&params.coset_at(i), &params.coset_at(j))? - &reference;
        let exact = oracle.get(i, j) - oracle.get(i0, j0);
        assert!(enclosure.contains(&exact));
        worst = worst.max(to_f64(&enclosure.radius));
    }
    println!("{} resolved pairs agree with the oracle, widest enclosure {worst:.1e}", pairs.len());
    Ok(())
}
