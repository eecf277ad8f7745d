//! Strip minima μ_k on {d < 1/k} and their growth exponent, which estimates the
//! bottom of the essential spectrum from below.

use hardylab::forms::FormSpec;
use hardylab::spectral::{persson_sequence, ProblemSpec};
use hardylab::Domain;

fn show(title: &str, problem: &ProblemSpec) -> hardylab::Result<()> {
    let t0 = std::time::Instant::now();
    let seq = persson_sequence(problem)?;
    println!("{title}: exponent {:?} ({:.2} s)", seq.fitted_exponent, t0.elapsed().as_secs_f64());
    for e in &seq.entries {
        println!("  k {:>2}  dof {:>5}  μ {:>12.4}  γκk^(2-β) {:>9.4}", e.k, e.dof, e.mu, e.criterion_bound);
    }
    Ok(())
}

fn main() -> hardylab::Result<()> {
    let unit = Domain::interval(0.0, 1.0)?;
    let ks: Vec<usize> = (2..=16).collect();
    // μ_k = π²k² for the Dirichlet Laplacian on a strip of width 1/k
    show("(0,1), a = 1", &ProblemSpec::new(unit.clone(), FormSpec::laplacian(), 0.5, vec![2, 4, 8]))?;
    show("(0,1), a = d^0.5", &ProblemSpec::new(unit, FormSpec::power(0.5), 0.9, ks))?;
    let disc = Domain::disc([0.0, 0.0], 1.0)?;
    show("unit disc, a = d^0.5", &ProblemSpec::new(disc, FormSpec::power(0.5), 0.9, vec![2, 3, 4, 5, 6]))
}
