//! One pass/fail line per acceptance criterion.

use std::collections::BTreeMap;
use std::time::Instant;

use genfourier::atoms::AtomSum;
use genfourier::cli::main_with_args;
use genfourier::report::{run_suite, CheckReport, Status, Suite, SuiteConfig};
use genfourier::transform::{eigenpair_plan, gaussian_closed_form, max_deviation};
use genfourier::Params;

const PAIRS: [(f64, u32); 3] = [(1.0, 1), (0.8, 2), (1.0, 3)];

/// Criteria that cannot pass as stated; see the ledger entry quoted in the line.
const KNOWN_UNATTAINABLE: &[(usize, &str)] =
    &[(4, "the three f-tilde constructions are different polynomials in H")];

struct Outcome {
    pass: bool,
    detail: String,
}

fn label(p: &Params) -> String {
    format!("(k={}, n={})", p.k(), p.n())
}

/// Worst residual over the named checks, across all pairs.
fn gather(results: &BTreeMap<String, Vec<CheckReport>>, names: &[&str]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in names {
        let mut worst = f64::NEG_INFINITY;
        let mut tol = 0.0;
        let mut reported = false;
        for (pair, reports) in results {
            let Some(c) = reports.iter().find(|c| c.name == *name) else {
                pass = false;
                parts.push(format!("{name} missing at {pair}"));
                continue;
            };
            tol = c.tolerance;
            if c.status == Status::Fail {
                pass = false;
            }
            if c.status == Status::Fail && !reported {
                reported = true;
                parts.push(format!("{name} failed at {pair}: {}", c.details));
            }
            worst = worst.max(if c.residual.is_nan() { f64::INFINITY } else { c.residual });
        }
        parts.push(format!("{name} worst {worst:.2e} (tol {tol:.0e})"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn gaussian_eigenpair() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (k, n) in PAIRS {
        let p = Params::new(k, n).unwrap();
        let plan = eigenpair_plan(p, 0.4, 3.0).unwrap();
        for s in [0.4, 0.5, 1.0, 2.0] {
            let d = max_deviation(&plan, &AtomSum::gaussian(s).unwrap(), &gaussian_closed_form(&p, s).unwrap(), 3.0).unwrap();
            worst = worst.max(d);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= worst <= 1e-6 && secs < 30.0;
    Outcome { pass, detail: format!("max deviation {worst:.2e} (tol 1e-6), runtime {secs:.1} s (limit 30 s)") }
}

fn verify_twice() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let run = |path: &std::path::Path| {
        main_with_args(["genfourier", "verify", "--k", "1", "--n", "1", "--output", path.to_str().unwrap()])
    };
    let (ca, cb) = (run(&a), run(&b));
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    Outcome {
        pass: !ta.is_empty() && ta == tb && ca == cb,
        detail: format!("{} bytes each, identical: {}, exit codes {ca}/{cb}", ta.len(), ta == tb),
    }
}

fn main() {
    let config = SuiteConfig::default();
    let mut results: BTreeMap<String, Vec<CheckReport>> = BTreeMap::new();
    for (k, n) in PAIRS {
        let p = Params::new(k, n).unwrap();
        let reports = Suite::ALL.iter().flat_map(|s| run_suite(*s, &p, &config)).collect();
        results.insert(label(&p), reports);
    }
    let criteria: Vec<(&str, Outcome)> = vec![
        ("Gaussian eigenpair", gaussian_eigenpair()),
        ("inversion round trip", gather(&results, &["transform.round_trip"])),
        ("kernel identities", gather(&results, &["kernel.initial_value", "kernel.symmetry", "kernel.eigenfunction"])),
        (
            "exact operator algebra",
            gather(
                &results,
                &[
                    "algebra.sl2",
                    "algebra.normal_ordering",
                    "algebra.raising_recursion",
                    "algebra.h_powers",
                    "algebra.f_tilde_agreement",
                ],
            ),
        ),
        ("kernel-derivative recursions", gather(&results, &["kernel.derivative_expansion", "kernel.base_case"])),
        ("transform identities and membership", gather(&results, &["transform.ladder_identity", "transform.membership"])),
        ("translation and convolution support", gather(&results, &["convolution.support"])),
        (
            "approximate identity",
            gather(&results, &["density.approx_identity_decrease", "density.approx_identity_final"]),
        ),
        (
            "g_m inequality, T inverse, embedding chain",
            gather(&results, &["convolution.gm_inequality", "convolution.t_inverse", "schwartz.embedding"]),
        ),
        ("determinism of verify reports", verify_twice()),
    ];
    let mut unexpected = 0;
    for (i, (name, o)) in criteria.iter().enumerate() {
        let idx = i + 1;
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {idx:>2} {tag} {name}: {}", o.detail);
        if !o.pass {
            match KNOWN_UNATTAINABLE.iter().find(|(j, _)| *j == idx) {
                Some((_, why)) => println!("             expected failure: {why}"),
                None => unexpected += 1,
            }
        }
    }
    let passed = criteria.iter().filter(|(_, o)| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass, {unexpected} unexpected failures", criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
