use std::time::Instant;

use ising_ais::ais::path_rng;
use ising_ais::model::{build_square_lattice, SquareBoundary};
use ising_ais::sw::SwKernel;
use ising_ais::SpinConfig;

fn main() {
    let n = 40;
    let g = build_square_lattice(n, n, SquareBoundary::VERTICAL_PLUS, 0.5_f64).unwrap().graph;
    let mut kernel = SwKernel::new(&g);
    let mut rng = path_rng(1, 0);
    let mut s = SpinConfig::all_up(n * n);
    for theta in [0.0, 0.5, 1.0] {
        let sweeps = 20_000;
        let start = Instant::now();
        for _ in 0..sweeps {
            kernel.step(&g, theta, &mut s, &mut rng);
        }
        let per = start.elapsed().as_secs_f64() / sweeps as f64;
        println!("theta {theta}: {:.1} us/sweep, {} clusters", per * 1e6, kernel.last_cluster_count());
    }
}
