//! Dirichlet Laplacian on the unit disc: the first eigenvalues on nested meshes,
//! the Richardson limit, and the counting function.

use hardylab::eigen::{counting_function, refine_and_extrapolate, smallest_eigenpairs_with, SolverOptions};
use hardylab::expr::coef;
use hardylab::forms::{assemble_pencil, AssemblyOptions, FormSpec};
use hardylab::mesh::{build_trimesh, Mesh};
use hardylab::Domain;

fn main() -> hardylab::Result<()> {
    let disc = Domain::disc([0.0, 0.0], 1.0)?;
    let opts = SolverOptions::with_tol(1e-8);
    let base = Mesh::TwoD(build_trimesh(&disc, 0.1, 1.0)?);
    let pencil = assemble_pencil(&base, &FormSpec::laplacian(), &coef("1"), &AssemblyOptions::default())?;
    let report = smallest_eigenpairs_with(&pencil, 6, &opts)?;
    println!("h = 0.1, {} dof", report.dof);
    for (l, r) in report.eigenvalues.iter().zip(&report.residuals) {
        println!("  λ = {l:.6}  residual {r:.1e}");
    }
    let count = counting_function(&report, 30.0);
    println!("N(30) = {} (lower bound only: {})", count.count, count.lower_bound_only);

    let mut meshes = vec![base];
    let table = refine_and_extrapolate(
        3,
        |level| {
            while meshes.len() <= level {
                let next = meshes.last().unwrap().refine()?;
                meshes.push(next);
            }
            assemble_pencil(&meshes[level], &FormSpec::laplacian(), &coef("1"), &AssemblyOptions::default())
        },
        &opts,
    )?;
    for l in &table.levels {
        println!("level {} dof {:>6} λ₁ = {:.6}", l.level, l.dof, l.value);
    }
    println!("extrapolated λ₁ = {:.6} ({:?}); j₀,₁² = 5.783186", table.extrapolated, table.status);
    Ok(())
}
