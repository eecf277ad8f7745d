//! IMS partition of unity across the band δ_in < d < δ_out and the pointwise
//! defect of the localization identity for random finite element functions.

use hardylab::expr::coef;
use hardylab::forms::{ims_identity_residual, ims_partition};
use hardylab::mesh::{build_mesh_1d, build_trimesh, Mesh};
use hardylab::Domain;
use rand::{Rng, SeedableRng};

fn main() -> hardylab::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let meshes = [
        (Mesh::OneD(build_mesh_1d(&Domain::interval(0.0, 1.0)?, 64, 1.0)?), 0.3),
        (Mesh::TwoD(build_trimesh(&Domain::disc([0.0, 0.0], 1.0)?, 0.05, 1.0)?), 0.5),
    ];
    for (mesh, delta_out) in &meshes {
        let part = ims_partition(mesh, 0.1, *delta_out)?;
        let sum = part.phi1.iter().zip(&part.phi2).map(|(a, b)| (a * a + b * b - 1.0).abs()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let u: Vec<f64> = (0..mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
            worst = worst.max(ims_identity_residual(mesh, &part, &u, &coef("d^0.5"))?);
        }
        println!("{}: max |φ₁² + φ₂² − 1| = {sum:.1e}, identity defect {worst:.1e}", mesh.domain().name());
    }
    Ok(())
}
