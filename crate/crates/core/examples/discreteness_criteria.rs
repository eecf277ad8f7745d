//! Pointwise and form criteria for q = -c d^-2 on both sides of the critical
//! coupling, and the staged discreteness diagnostic.

use hardylab::expr::coef;
use hardylab::forms::FormSpec;
use hardylab::spectral::{check_form_nonnegativity, check_pointwise_criterion, discreteness_diagnostic, ProblemSpec};
use hardylab::Domain;

fn main() -> hardylab::Result<()> {
    let unit = Domain::interval(0.0, 1.0)?;
    // (1 − γ)κ(0) = 0.125 separates the two couplings
    for c in [0.125, 0.3] {
        let form = FormSpec::power(0.0).with_q(coef(&format!("-{c}*d^-2")));
        let p = ProblemSpec::new(unit.clone(), form, 0.5, vec![2]);
        let point = check_pointwise_criterion(&p, p.remainder, p.samples)?;
        let form = check_form_nonnegativity(&p, p.k0())?;
        println!("q = -{c} d^-2: pointwise {:?} (worst {:+.3e}), form {:?}", point.verdict, point.worst_margin, form.verdict);
        for l in &form.levels {
            println!("  level {} dof {:>6} minimum {:+.6e}", l.level, l.dof, l.minimum);
        }
    }

    let ks: Vec<usize> = (2..=16).collect();
    for c in [0.03, 0.2] {
        let form = FormSpec::power(0.5).with_q(coef(&format!("-{c}*d^-1.5")));
        let report = discreteness_diagnostic(&ProblemSpec::new(unit.clone(), form, 0.5, ks.clone()))?;
        println!("a = d^0.5, q = -{c} d^-1.5: {:?}, failing stage {:?}", report.verdict, report.failing_stage);
        for r in &report.reasons {
            println!("  {r}");
        }
    }
    Ok(())
}
