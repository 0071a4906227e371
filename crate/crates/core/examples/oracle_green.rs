//! Exact Green table from the finite linear system, with both normalizations.

use tate_green::domain::{Coset, Params};
use tate_green::oracle::{normalize, resolved_pairs, solve_green, stabilized_value, Normalization};

fn main() -> tate_green::Result<()> {
    let params = Params::new(2, 1, 1, 3)?;
    let table = solve_green(&params)?;
    let q = params.q();
    let labels: Vec<String> = (0..params.coset_count()).map(|i| params.coset_at(i).compact(q)).collect();

    println!("G at {params}, max entry 0:");
    for (i, row) in labels.iter().enumerate() {
        let cells: Vec<String> = (0..labels.len()).map(|j| format!("{:>9}", table.get(i, j).to_string())).collect();
        println!("{row:>7} {}", cells.join(""));
    }

    let anchored = normalize(&table, Normalization::Anchored(0, 1))?;
    println!("anchored at (0,1): G(0,0) = {}", anchored.get(0, 0));
    println!("{} of {} pairs are final at this level", resolved_pairs(&params).len(), labels.len().pow(2));

    // Values stabilize once the level exceeds the distance between the points.
    let x = Coset::new(0, vec![1, 0, 0]);
    for y in [Coset::new(0, vec![1, 1, 0]), Coset::new(0, vec![1, 0, 1])] {
        println!("stable G({}, {}) = {}", x.compact(q), y.compact(q), stabilized_value(&x, &y, &params, 6)?);
    }
    Ok(())
}
