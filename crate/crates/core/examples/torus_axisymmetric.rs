//! Axisymmetric reduction of the solid torus: eigenvalues of azimuthal modes on
//! the meridian disc with measure r dr dz.

use hardylab::eigen::{smallest_eigenpairs_with, SolverOptions};
use hardylab::expr::coef;
use hardylab::forms::{assemble_pencil, AssemblyOptions, FormSpec};
use hardylab::mesh::{axisymmetric_reduce, build_trimesh, Mesh};
use hardylab::Domain;

fn main() -> hardylab::Result<()> {
    let torus = Domain::torus(3.0, 1.0)?;
    for mode in [0, 1, 2] {
        let red = axisymmetric_reduce(&torus, mode)?;
        let mesh = Mesh::TwoD(build_trimesh(&red.cross_section, 0.08, 1.0)?);
        let form = FormSpec::laplacian().with_q(red.potential.clone());
        // the measure r is applied by the cylindrical options
        let pencil = assemble_pencil(&mesh, &form, &coef("1"), &AssemblyOptions::cylindrical())?;
        let rep = smallest_eigenpairs_with(&pencil, 3, &SolverOptions::with_tol(1e-8))?;
        println!("mode {mode}: {:?}", rep.eigenvalues.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>());
    }
    Ok(())
}
