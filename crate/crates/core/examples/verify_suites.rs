//! Runs the fast verification suites and prints one line per check.

use genfourier::report::{run_suite, Suite, SuiteConfig};
use genfourier::Params;

fn main() -> genfourier::Result<()> {
    let p = Params::new(1.0, 1)?;
    let config = SuiteConfig::default();
    for suite in [Suite::Kernel, Suite::Algebra, Suite::Schwartz] {
        for c in run_suite(suite, &p, &config) {
            println!("{:?} {} {:.2e} (tol {:.0e})", c.status, c.name, c.residual, c.tolerance);
        }
    }
    Ok(())
}
