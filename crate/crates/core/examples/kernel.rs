//! Kernel values, symmetry, and the derivative recursions with their resolved base cases.

use genfourier::kernel::{derivative_coeffs, iterated_kernel_expansion, kernel, kernel_bound_scan};
use genfourier::Params;

fn main() -> genfourier::Result<()> {
    for (k, n) in [(1.0, 1), (0.8, 2), (1.0, 3)] {
        let p = Params::new(k, n)?;
        let b = kernel(&p, 0.7, 1.3)?;
        let sym = (b - kernel(&p, 1.3, 0.7)?).norm();
        println!("k={k} n={n}: B(0.7, 1.3) = {:.12} {:+.12}i, symmetry gap {sym:.1e}", b.re, b.im);
        let scan = kernel_bound_scan(&p, 60.0, 500)?;
        println!("  sup |B| ~ {:.6} (stable: {})", scan.m_estimate, scan.stable);
        let coeffs = derivative_coeffs(&p, 3)?;
        for r in &coeffs.resolutions {
            println!("  {}: {:?}", r.item, r.chosen);
        }
        let v = iterated_kernel_expansion(&p, 1, 2, 0.9, -1.4)?;
        println!("  (n|x|^(2-2/n) Δ_k)(x d/dx)^2 B at (0.9, -1.4) = {:.10} {:+.10}i", v.re, v.im);
    }
    Ok(())
}
