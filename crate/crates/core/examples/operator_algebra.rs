//! Exact operator calculus on atom sums: sl(2), H^m and the three f-tilde constructions.

use genfourier::atoms::{iterate_h, sequence_f_m, sequence_f_tilde_with, AtomSum, FTildeConstruction};
use genfourier::special_fn::StirlingTable;
use genfourier::Params;

fn main() -> genfourier::Result<()> {
    let p = Params::new(1.0, 1)?;
    let f = AtomSum::gaussian(0.5)?;
    let raise = f.apply_raise(&p);
    let lower = f.apply_lower(&p);
    println!("f          = {f}");
    println!("E+ f       = {raise}");
    println!("E- f       = {lower}");
    println!("H f        = {}", f.apply_h(&p));
    let bracket = raise.apply_lower(&p).sub(&lower.apply_raise(&p));
    println!("[E-,E+] f - 4 H f: {:.1e}", bracket.max_relative_diff(&f.apply_h(&p).scale_real(4.0)));

    let table = StirlingTable::new(6)?;
    for m in 0..=4 {
        let gap = sequence_f_m(&f, m, &p, &table)?.max_relative_diff(&iterate_h(&f, m, &p));
        println!("f_{m} vs H^{m} f: {gap:.1e}");
    }
    for c in [FTildeConstruction::StirlingSum, FTildeConstruction::Recursion, FTildeConstruction::FallingFactorial] {
        println!("{c:?} (beta=2, l=1): {}", sequence_f_tilde_with(c, &f, 2, 1, &p, &table)?);
    }
    Ok(())
}
