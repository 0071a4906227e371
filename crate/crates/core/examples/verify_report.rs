//! Run every invariant at one level and print the failures, if any.

use tate_green::domain::Params;
use tate_green::rational::pow;
use tate_green::verify::verify;

fn main() -> tate_green::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let [p, f, m, k] = match args[..] {
        [p, f, m, k] => [p, f, m, k],
        _ => [3, 1, 2, 2],
    };
    let params = Params::new(p, f as u32, m as u32, k as u32)?;
    let report = verify(&params, &pow(10, -12))?;
    for check in &report.checks {
        println!("{:<32} {:?}", check.name, check.status);
    }
    let s = report.summary();
    println!("pass={} fail={} skipped={}", s.pass, s.fail, s.skipped);
    for f in report.failures() {
        eprintln!("FAILED {}: {:?}", f.name, f.witness);
    }
    Ok(())
}
