//! The coefficient language: coordinates, d and r, min/max/abs, positive and
//! negative parts, and the errors reported for malformed input.

use hardylab::expr::EvalPoint;
use hardylab::CoefficientExpr;

fn main() {
    let p = EvalPoint::cartesian(&[0.3, 0.4], 0.25);
    for text in ["d^0.5", "-0.125*d^-2", "1 + x^2 + y^2", "neg(x - 0.5)", "min(d, 0.1) * abs(x1 - y)", "max(1, d^-1, 2)", "d^^2", "foo(d)"] {
        match CoefficientExpr::parse(text) {
            Ok(e) => println!("{text:<26} = {:+.6}", e.eval(&p)),
            Err(err) => println!("{text:<26} ! {err}"),
        }
    }
}
