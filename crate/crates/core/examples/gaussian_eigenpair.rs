//! The forward transform of exp(-s n |x|^(2/n)) against its closed form.

use genfourier::atoms::AtomSum;
use genfourier::transform::{eigenpair_plan, gaussian_closed_form, max_deviation};
use genfourier::Params;

fn main() -> genfourier::Result<()> {
    for (k, n) in [(1.0, 1), (0.8, 2), (1.0, 3)] {
        let p = Params::new(k, n)?;
        let plan = eigenpair_plan(p, 0.4, 3.0)?;
        for s in [0.4, 0.5, 1.0, 2.0] {
            let f = AtomSum::gaussian(s)?;
            let dev = max_deviation(&plan, &f, &gaussian_closed_form(&p, s)?, 3.0)?;
            println!("k={k} n={n} s={s}: max |F f - closed form| on |x| <= 3 is {dev:.2e}");
        }
    }
    let p = Params::new(1.0, 1)?;
    println!("s = 1/2 is a fixed point at k=1, n=1: {}", gaussian_closed_form(&p, 0.5)?);
    Ok(())
}
