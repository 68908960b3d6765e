//! Seminorm tables, the sandwich bounds and the L^p embedding chain.

use std::sync::Arc;

use genfourier::atoms::AtomSum;
use genfourier::measure::{GridSpec, QuadratureGrid};
use genfourier::schwartz::{
    embedding_beta_threshold, embedding_constants, membership_report, sandwich, seminorm_p, seminorm_q, Member,
};
use genfourier::Params;

fn main() -> genfourier::Result<()> {
    let p = Params::new(1.0, 1)?;
    let f = AtomSum::gaussian(0.5)?;
    println!("P_10 = {:.9} (2/e), Q_1 = {:.9} (2 e^-1/2)", seminorm_p(1, 0, &f, &p), seminorm_q(1, &f, &p));
    let table = membership_report(Member::Atoms(&f), &p, 2)?;
    print!("{}", table.to_csv());

    let odd = AtomSum::odd_gaussian(0.7)?;
    for c in sandwich(&odd, &Params::new(0.8, 2)?, 2, 1)? {
        println!("a={} b={} l={}: {:.4} <= {:.4} <= {:.4}", c.alpha, c.beta, c.ell, c.lower, c.middle, c.upper);
    }

    let grid = Arc::new(QuadratureGrid::new(p, GridSpec::default())?);
    let beta = embedding_beta_threshold(&p, 2.0) + 1;
    let chain = embedding_constants(&f, 2.0, beta, 1, grid)?;
    println!("{:.6} <= {:.6} <= {:.6} (slack {:.3})", chain.f_norm, chain.gm_norm, chain.bound, chain.slack());
    Ok(())
}
