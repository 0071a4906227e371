//! Walk the finite quotient: cosets, distances, Haar measures and the two symmetries.

use tate_green::domain::{
    additive_measure, enumerate_cosets, multiplicative_measure, reflect, unit_multiply, valuation_of_difference, Params,
};

fn main() -> tate_green::Result<()> {
    let params = Params::new(3, 1, 2, 2)?;
    let q = params.q();
    let cosets = enumerate_cosets(&params);
    println!("{params}: {} cosets, volume {}", cosets.len(), params.volume());

    let x = &cosets[0];
    for y in cosets.iter().skip(1).step_by(5) {
        println!(
            "v({} - {}) = {:?}",
            x.compact(q),
            y.compact(q),
            valuation_of_difference(x, y)?
        );
    }

    for c in cosets.iter().step_by(7) {
        println!(
            "{:>8}  mu+ = {:<6} mux = {:<6} 2*x = {:>8}  reflected = {}",
            c.compact(q),
            additive_measure(c, &params).to_string(),
            multiplicative_measure(c, &params).to_string(),
            unit_multiply(c, 2, &params)?.compact(q),
            reflect(c, &params)?.compact(q),
        );
    }
    Ok(())
}
