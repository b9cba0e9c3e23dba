//! Fixed inputs shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torus_ksys::triangulation::random_triangulation;
use torus_ksys::Triangulation;

/// `count` random triangulations of the `n`-gon, the same on every run.
pub fn sample(n: usize, count: usize) -> Vec<Triangulation> {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    (0..count)
        .map(|_| random_triangulation(n, &mut rng))
        .collect()
}
