//! Translation and convolution on the Fourier side, with the support and Young checks.

use genfourier::atoms::AtomSum;
use genfourier::convolution::{bump, convolve, convolve_direct, translate, young_check};
use genfourier::measure::GridFunction;
use genfourier::report::{suite_plan, support_plan};
use genfourier::Params;

fn main() -> genfourier::Result<()> {
    let p = Params::new(0.8, 2)?;
    let plan = suite_plan(p)?;
    let f = plan.sample(&AtomSum::gaussian(0.5)?)?;
    let g = plan.sample(&AtomSum::odd_gaussian(0.7)?)?;
    let fg = convolve(&plan, &f, &g)?;
    let i = plan.source().len() / 2 + 40;
    let x = plan.source().x_nodes()[i];
    let direct = convolve_direct(&plan, &f, &g, x)?;
    println!("(f*g)({x:.4}) = {:.10}, direct quadrature {:.10}", fg.values()[i], direct);
    println!("Young ratio p=r=q=1: {:.6}", young_check(&plan, &f, &f, 1.0, 1.0, 1.0)?);

    let sp = support_plan(p)?;
    let a = GridFunction::from_real_fn(sp.source().clone(), bump(&p, 1.0))?;
    let b = GridFunction::from_real_fn(sp.source().clone(), bump(&p, 0.8))?;
    let ab = convolve(&sp, &a, &b)?;
    println!("mass of bump*bump outside |x| = (1 + 0.8)^2: {:.1e}", ab.mass_outside(p.to_x(1.8)));
    let t = translate(&sp, &a, 0.6)?;
    println!("mass of translated bump outside (0.6^(1/2) + 1)^2: {:.1e}", t.mass_outside(p.to_x(p.to_u(0.6) + 1.0)));
    Ok(())
}
