//! Instance generators.

use kcomp_core::adversary::{prop2_instance, theorem2_instance};
use kcomp_core::instance::{Point, TabularInstance};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Generator;
use crate::CliError;

/// `n` points with nonzero coordinates in `[-1, 1]`, random weights, gaps in
/// `(0, 1]` and random labels.
pub fn random_instance(n: usize, seed: u64) -> Result<TabularInstance, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..n)
        .map(|_| {
            let magnitude = 1.0 - rng.gen::<f64>();
            if rng.gen_bool(0.5) {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let residue = 1.0 - weights.iter().sum::<f64>();
    let last = weights.len() - 1;
    weights[last] += residue;
    let utility: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let gap = 1.0 - rng.gen::<f64>();
            let low = rng.gen::<f64>() * (1.0 - gap);
            if rng.gen_bool(0.5) {
                [low, low + gap]
            } else {
                [low + gap, low]
            }
        })
        .collect();
    Ok(TabularInstance::from_f64(Point::on_line(&coords), &weights, &utility)?)
}

/// Instance from a named generator. The theorem2 generator yields the first
/// utility of the pair.
pub fn generate(generator: Generator, n: usize, k: usize, seed: u64) -> Result<TabularInstance, CliError> {
    match generator {
        Generator::Random => random_instance(n, seed),
        Generator::Theorem2 => Ok(theorem2_instance(k)?.first),
        Generator::Prop2 => Ok(prop2_instance(k)?.instance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_valid_and_seeded() {
        for seed in 0..50 {
            let a = random_instance(8, seed).unwrap();
            assert_eq!(a.len(), 8);
            assert!(a.points().iter().all(|p| p.coord.is_some_and(|c| c != 0.0)));
            assert_eq!(a, random_instance(8, seed).unwrap());
        }
        assert_ne!(random_instance(4, 1).unwrap(), random_instance(4, 2).unwrap());
    }
}
