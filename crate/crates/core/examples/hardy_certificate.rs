//! Certifies the weighted Hardy inequality on an interval and on the torus
//! cross-section, printing the per-level minima.

use std::time::Instant;

use hardylab::eigen::SolverOptions;
use hardylab::hardy::{lambda_bound, verify_hardy, HardyBoundSpec, HardyCertificate, HardyLadder, LambdaMethod};
use hardylab::Domain;

fn show(title: &str, cert: &HardyCertificate) {
    println!("{title}: κ = {}, λ = {} -> {:?}", cert.bound.kappa, cert.bound.lambda, cert.verdict);
    for l in &cert.levels {
        println!("  level {} dof {:>6}  minimum {:.10}  margin {:+.3e}", l.level, l.dof, l.minimum, l.margin);
    }
}

fn main() -> hardylab::Result<()> {
    let unit = Domain::interval(0.0, 1.0)?;
    let solver = SolverOptions::default();
    let ladder = HardyLadder::default();

    for (beta, lambda) in [(0.0, 0.0), (0.0, 3.0), (0.5, 0.0)] {
        let bound = HardyBoundSpec::manual(beta, 0.0, lambda)?;
        let cert = verify_hardy(&unit, &bound, &ladder, &solver)?;
        show(&format!("(0,1) β = {beta}"), &cert);
    }

    // λ from the interior-diameter bound on a convex domain
    let fmt = lambda_bound(&unit, LambdaMethod::FmtDint, 0.0)?;
    show("(0,1) catalogue", &verify_hardy(&unit, &fmt, &ladder, &solver)?);

    let torus = Domain::torus(3.0, 1.0)?;
    let tube = lambda_bound(&torus, LambdaMethod::FmtWeighted { alpha: 0.0 }, 0.0)?;
    let t0 = Instant::now();
    let cert = verify_hardy(&torus, &tube, &HardyLadder { levels: 2, ..Default::default() }, &SolverOptions::with_tol(1e-8))?;
    show("torus (3,1), axisymmetric", &cert);
    println!("  ({:.1} s)", t0.elapsed().as_secs_f64());
    println!("{}", cert.semantics);
    Ok(())
}
