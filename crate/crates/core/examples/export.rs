//! Deterministic dumps for downstream tools.

use tate_green::analytic::c_matrix;
use tate_green::domain::Params;
use tate_green::export::{render_green, render_matrix, valuation_labels, Format};
use tate_green::oracle::solve_green;

fn main() -> tate_green::Result<()> {
    let params = Params::new(3, 1, 1, 1)?;
    print!("{}", render_green(&solve_green(&params)?, Format::Csv));

    let params = Params::new(2, 1, 3, 1)?;
    print!("{}", render_matrix(&params, &valuation_labels(3), &c_matrix(&params), Format::Json));
    Ok(())
}
