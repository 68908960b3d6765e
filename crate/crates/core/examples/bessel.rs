//! Normalized Bessel functions against the half-integer closed forms.

use genfourier::special_fn::{normalized_bessel, BesselOrder};

fn main() -> genfourier::Result<()> {
    let half = BesselOrder::new(0.5)?;
    let three_halves = BesselOrder::new(1.5)?;
    println!("{:>6} {:>22} {:>22} {:>10}", "z", "j_1/2(z)", "sin z / z", "gap");
    for z in [0.5, 2.0, 10.0, 35.0, 80.0, 150.0] {
        let v = normalized_bessel(half, z)?;
        let exact = z.sin() / z;
        println!("{z:>6} {v:>22.15e} {exact:>22.15e} {:>10.1e}", (v - exact).abs());
    }
    let z = 1.0f64;
    let exact = 3.0 * (z.sin() - z * z.cos());
    println!("j_3/2(1) = {:.15} (closed form {exact:.15})", normalized_bessel(three_halves, z)?);
    Ok(())
}
