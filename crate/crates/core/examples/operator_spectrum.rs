//! The flat Laplacian at a small level and its spectrum.

use tate_green::domain::Params;
use tate_green::operator::{apply, build_operator_matrix, spectrum, SampledFunction};
use tate_green::rational::int;

fn main() -> tate_green::Result<()> {
    let params = Params::new(2, 1, 2, 2)?;
    let d = build_operator_matrix(&params);
    println!("operator at {params}:\n{d}");

    // Constants are annihilated; a point mass is not.
    let ones = SampledFunction::constant(&params, int(1));
    println!("D 1 = {:?}", apply(&d, &ones)?.values().iter().map(ToString::to_string).collect::<Vec<_>>());
    let delta = SampledFunction::basis(&params, 0);
    println!("D e0 = {:?}", apply(&d, &delta)?.values().iter().map(ToString::to_string).collect::<Vec<_>>());

    let s = spectrum(&d)?;
    println!("eigenvalues {:?}", s.eigenvalues);
    println!("exact kernel dimension {}", s.kernel_dim);
    Ok(())
}
