//! Distance, gradient and −Δd on each domain kind, checked against finite
//! differences, plus superharmonicity scans of the torus on both sides of c = 2R.

use hardylab::geometry::{default_fd_step, distance_calculus, distance_calculus_fd, interior_diameter, superharmonicity_scan, volume, ScanRegion};
use hardylab::Domain;

fn main() -> hardylab::Result<()> {
    let cases: Vec<(Domain, Vec<f64>)> = vec![
        (Domain::interval(0.0, 2.0)?, vec![0.3]),
        (Domain::rectangle(0.0, 0.0, 2.0, 1.0)?, vec![0.4, 0.3]),
        (Domain::disc([0.0, 0.0], 1.0)?, vec![0.2, -0.5]),
        (Domain::annulus([0.0, 0.0], 1.0, 2.0)?, vec![1.2, 0.4]),
        (Domain::torus(3.0, 1.0)?, vec![2.4, 1.0, 0.3]),
    ];
    for (domain, p) in &cases {
        let exact = distance_calculus(domain, p, 0.0)?;
        let fd = distance_calculus_fd(domain, p, default_fd_step(domain))?;
        println!(
            "{:<15} d = {:.6}  -Δd = {:+.6}  (fd {:+.6})  D_int = {:.4}  |Ω| = {:.4}",
            domain.name(),
            exact.d,
            exact.neg_laplacian,
            fd.neg_laplacian,
            interior_diameter(domain),
            volume(domain)
        );
    }

    // −Δd = 1/(c/R − 1) on the outer equator, negative near the axis once c < 2R
    for (c, r) in [(3.0, 1.0), (2.0, 1.0), (1.8, 1.0)] {
        let scan = superharmonicity_scan(&Domain::torus(c, r)?, ScanRegion::Full, 200)?;
        println!("torus ({c}, {r}): min -Δd = {:+.6} at {:?} -> {:?}", scan.min_value, scan.argmin, scan.verdict);
    }

    match hardylab::geometry::distance(&Domain::disc([0.0, 0.0], 1.0)?, &[2.0, 0.0]) {
        Err(e) => println!("outside point: {e}"),
        Ok(d) => println!("unexpected d = {d}"),
    }
    Ok(())
}
