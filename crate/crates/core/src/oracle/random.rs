//! Seeded random states and isotropic (Haar) averages.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::DensityMatrix;
use crate::parallel::{self, ExecMode};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn random_pure_state(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = (0..1usize << n).map(|_| gaussian(rng)).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut psi {
        *z /= norm;
    }
    psi
}

/// `GG† / Tr(GG†)` for a square complex Ginibre matrix `G`.
pub fn random_density_matrix(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let d = 1usize << n;
    let g: Vec<Complex64> = (0..d * d).map(|_| gaussian(rng)).collect();
    let mut data = vec![Complex64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            data[r * d + c] = (0..d).map(|k| g[r * d + k] * g[c * d + k].conj()).sum();
        }
    }
    let tr: f64 = (0..d).map(|i| data[i * d + i].re).sum();
    for z in &mut data {
        *z /= tr;
    }
    DensityMatrix::from_data(n, data).expect("consistent dimensions")
}

/// Independent generator for sample `index` of a seeded batch, so results do
/// not depend on how samples are split across threads.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean of `f(|ψ⟩⟨ψ|)` over `samples` Haar-random `n`-qubit pure states.
pub fn haar_average<F>(n: usize, samples: usize, seed: u64, mode: ExecMode, f: F) -> f64
where
    F: Fn(&DensityMatrix) -> f64 + Sync + Send,
{
    if samples == 0 {
        return f64::NAN;
    }
    let values = parallel::map_range(mode, samples, |i| {
        let mut rng = sample_rng(seed, i as u64);
        let rho =
            DensityMatrix::from_pure(&random_pure_state(n, &mut rng)).expect("power-of-two length");
        f(&rho)
    });
    values.iter().sum::<f64>() / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_pure_state(3, &mut rng);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(random_density_matrix(2, &mut rng).is_valid(1e-10));
    }

    #[test]
    fn haar_average_is_reproducible_across_modes() {
        let f = |rho: &DensityMatrix| rho.get(0, 0).re;
        let a = haar_average(1, 500, 42, ExecMode::Sequential, f);
        let b = haar_average(1, 500, 42, ExecMode::Parallel, f);
        assert_eq!(a, b);
        // ⟨0|ρ|0⟩ averages to 1/2 over the sphere
        assert!((a - 0.5).abs() < 0.05);
    }
}
