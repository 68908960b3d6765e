//! ‖f ⋆ φ_r - f‖_p along a dilation schedule, and the density argument on a tent.

use genfourier::cli::density_run;
use genfourier::Params;

fn main() -> genfourier::Result<()> {
    let p = Params::new(1.0, 3)?;
    for exp in [1.0, 2.0] {
        let run = density_run(&p, exp, 0.05)?;
        for seq in &run.sequences {
            let rel: Vec<String> = seq.errors.iter().map(|e| format!("{:.3e}", e / seq.norm)).collect();
            println!("p={exp} {}: {}", seq.input, rel.join(" -> "));
        }
        let d = &run.density;
        println!("  tent: delta={} ‖f-g‖={:.3e} chosen r={:?} total={:?}", d.delta, d.f_minus_g, d.chosen_r, d.total_error);
    }
    Ok(())
}
