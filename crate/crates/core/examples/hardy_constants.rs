//! Hardy constants κ(β), C_fmt(α, β) and C_tub(α, β), and the λ(Ω) catalogue.

use hardylab::hardy::{c_fmt_branches, hardy_constants, kappa, lambda_bound, LambdaMethod};
use hardylab::Domain;

fn main() -> hardylab::Result<()> {
    for beta in [-1.0, 0.0, 0.5, 0.9] {
        println!("κ({beta}) = {}", kappa(beta));
    }
    for (alpha, beta) in [(0.0, 0.0), (-1.0, 0.0), (-1.5, 0.0), (0.0, 0.5), (1.0, -1.0)] {
        let c = hardy_constants(alpha, beta)?;
        let (low, high) = c_fmt_branches(alpha, beta);
        println!("α = {alpha:+}, β = {beta:+}: C_fmt = {:?}, C_tub = {:?}  (branches {low}, {high})", c.c_fmt, c.c_tub);
    }

    let unit = Domain::interval(0.0, 1.0)?;
    let disc = Domain::disc([0.0, 0.0], 1.0)?;
    for (domain, methods) in [
        (&unit, vec![LambdaMethod::BrezisMarcus, LambdaMethod::FmtDint, LambdaMethod::AvkhadievWirths, LambdaMethod::FmtWeighted { alpha: 0.0 }]),
        (&disc, vec![LambdaMethod::HhlVolume, LambdaMethod::EvansLewisVolume, LambdaMethod::FmtDint]),
    ] {
        for m in methods {
            let b = lambda_bound(domain, m, 0.0)?;
            println!("{:<10} {:<20} λ = {:.12}", domain.name(), m.label(), b.lambda);
        }
    }

    // hypotheses are checked, not assumed
    let annulus = Domain::annulus([0.0, 0.0], 1.0, 2.0)?;
    if let Err(e) = lambda_bound(&annulus, LambdaMethod::HhlVolume, 0.0) {
        println!("annulus: {e}");
    }
    let torus = Domain::torus(3.0, 1.0)?;
    let tube = lambda_bound(&torus, LambdaMethod::Tubular { alpha: 0.0, delta: 0.5 }, 0.0)?;
    println!("torus tubular δ = 0.5: λ = {}", tube.lambda);
    Ok(())
}
