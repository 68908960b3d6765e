//! Inversion and the ladder identities on atom sums.

use genfourier::report::{atom_suite, suite_plan};
use genfourier::transform::{intertwining_residuals, round_trip_error, ladder_identity};
use genfourier::Params;

fn main() -> genfourier::Result<()> {
    let p = Params::new(0.8, 2)?;
    let plan = suite_plan(p)?;
    for (name, f) in atom_suite(&p) {
        println!("{name}: {f}");
        println!("  round trip {:.2e}", round_trip_error(&plan, &f)?);
        println!("  intertwining {:?}", intertwining_residuals(&plan, &f)?);
        for (a, b) in [(0, 0), (1, 0), (0, 1), (2, 2)] {
            println!("  identity (alpha={a}, beta={b}): {:.2e}", ladder_identity(&plan, &f, a, b)?);
        }
    }
    Ok(())
}
