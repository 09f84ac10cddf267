//! Seeded generators for synthetic instances.
//!
//! Every draw comes from ChaCha20 seeded with `seed` and positioned on the
//! sub-stream `(instance << 8) | purpose`, so each (instance, purpose) pair
//! has its own reproducible sequence. Gaussians use the ziggurat sampler of
//! `rand_distr::StandardNormal`; uniform draws use `rand_distr::Uniform`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{invalid, Result};
use crate::linalg::{DenseMatrix, ObservationMask};

/// What a random sub-stream is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    LowRank = 1,
    Mask = 2,
    Outliers = 3,
    Noise = 4,
}

/// Magnitude bound of planted outliers.
pub const OUTLIER_BOUND: f64 = 10.0;

/// The generator for `(seed, instance, purpose)`.
pub fn rng_stream(seed: u64, instance: u64, purpose: Purpose) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((instance << 8) | purpose as u64);
    rng
}

/// How [`gen_mask`] interprets its rate argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskMode {
    /// Over-sampling ratio: `p = OS·(2m − r)·r / m²`.
    Oversampling,
    /// Observation probability `p` directly.
    Density,
}

/// Per-entry observation probability implied by `rate`.
pub fn sampling_probability(m: usize, rate: f64, r: usize, mode: MaskMode) -> Result<f64> {
    let p = match mode {
        MaskMode::Oversampling => {
            let dof = ((2 * m).saturating_sub(r) * r) as f64;
            rate * dof / (m * m) as f64
        }
        MaskMode::Density => rate,
    };
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("sampling probability {p} outside [0, 1]"));
    }
    Ok(p)
}

fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> DenseMatrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DenseMatrix::from_column_major(rows, cols, data).expect("finite normal samples")
}

/// Standard-normal factors `A`, `B` (each `m×r`) drawn from `rng`, `A` first.
pub fn gen_factors(m: usize, r: usize, rng: &mut ChaCha20Rng) -> (DenseMatrix, DenseMatrix) {
    let a = standard_normal_matrix(m, r, rng);
    let b = standard_normal_matrix(m, r, rng);
    (a, b)
}

/// `X* = c·ABᵀ` with `c` chosen so that `‖X*‖_F² = m²`.
pub fn gen_lowrank_from(m: usize, r: usize, rng: &mut ChaCha20Rng) -> Result<DenseMatrix> {
    if r == 0 || r > m {
        return invalid(format!("rank {r} outside 1..={m}"));
    }
    let (a, b) = gen_factors(m, r, rng);
    let x = a.matmul_transposed(&b)?;
    Ok(x.scale(m as f64 / x.frobenius_norm()))
}

pub fn gen_lowrank(m: usize, r: usize, seed: u64) -> Result<DenseMatrix> {
    gen_lowrank_from(m, r, &mut rng_stream(seed, 0, Purpose::LowRank))
}

pub fn gen_mask_from(
    m: usize,
    rate: f64,
    r: usize,
    mode: MaskMode,
    rng: &mut ChaCha20Rng,
) -> Result<ObservationMask> {
    let p = sampling_probability(m, rate, r, mode)?;
    let bits: Vec<bool> = (0..m * m).map(|_| rng.random::<f64>() < p).collect();
    ObservationMask::from_bitmap(m, m, bits)
}

/// Bernoulli(p) mask on an `m×m` grid.
pub fn gen_mask(
    m: usize,
    rate: f64,
    r: usize,
    seed: u64,
    mode: MaskMode,
) -> Result<ObservationMask> {
    gen_mask_from(m, rate, r, mode, &mut rng_stream(seed, 0, Purpose::Mask))
}

pub fn gen_outliers_from(m: usize, rho: f64, rng: &mut ChaCha20Rng) -> Result<DenseMatrix> {
    if !(0.0..=1.0).contains(&rho) {
        return invalid(format!("outlier fraction {rho} outside [0, 1]"));
    }
    let values = Uniform::new(-OUTLIER_BOUND, OUTLIER_BOUND).expect("valid bounds");
    let data: Vec<f64> = (0..m * m)
        .map(|_| {
            if rng.random::<f64>() >= rho {
                return 0.0;
            }
            // Open interval, and a planted outlier is never exactly zero.
            loop {
                let v = values.sample(rng);
                if v != 0.0 && v != -OUTLIER_BOUND {
                    return v;
                }
            }
        })
        .collect();
    DenseMatrix::from_column_major(m, m, data)
}

/// Bernoulli(ρ) support with values uniform on `(−10, 10)`.
pub fn gen_outliers(m: usize, rho: f64, seed: u64) -> Result<DenseMatrix> {
    gen_outliers_from(m, rho, &mut rng_stream(seed, 0, Purpose::Outliers))
}

pub fn add_noise_from(mat: &DenseMatrix, sigma: f64, rng: &mut ChaCha20Rng) -> Result<DenseMatrix> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid(format!("noise level must be finite and >= 0, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(mat.clone());
    }
    Ok(mat.map(|x| {
        let z: f64 = StandardNormal.sample(rng);
        x + sigma * z
    }))
}

/// Adds i.i.d. `𝒩(0, σ²)` to every entry.
pub fn add_noise(mat: &DenseMatrix, sigma: f64, seed: u64) -> Result<DenseMatrix> {
    add_noise_from(mat, sigma, &mut rng_stream(seed, 0, Purpose::Noise))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a: u64 = rng_stream(3, 0, Purpose::Mask).random();
        let b: u64 = rng_stream(3, 0, Purpose::Mask).random();
        let c: u64 = rng_stream(3, 1, Purpose::Mask).random();
        let d: u64 = rng_stream(3, 0, Purpose::Noise).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn oversampling_probability() {
        let p = sampling_probability(1000, 6.0, 20, MaskMode::Oversampling).unwrap();
        assert!((p - 0.2376).abs() < 1e-15);
        assert!(sampling_probability(200, 6.0, 20, MaskMode::Oversampling).is_err());
        assert!(sampling_probability(10, 1.5, 1, MaskMode::Density).is_err());
    }

    #[test]
    fn lowrank_is_normalised_and_deterministic() {
        let x = gen_lowrank(30, 3, 11).unwrap();
        assert!((x.frobenius_norm_squared() / 900.0 - 1.0).abs() < 1e-10);
        assert_eq!(x, gen_lowrank(30, 3, 11).unwrap());
        assert_ne!(x, gen_lowrank(30, 3, 12).unwrap());
    }

    #[test]
    fn extreme_rates() {
        assert!(gen_mask(8, 1.0, 1, 0, MaskMode::Density).unwrap().is_full());
        assert!(gen_mask(8, 0.0, 1, 0, MaskMode::Density)
            .unwrap()
            .is_empty());
        assert_eq!(gen_outliers(8, 0.0, 0).unwrap(), DenseMatrix::zeros(8, 8));
        let m = gen_lowrank(6, 2, 1).unwrap();
        assert_eq!(add_noise(&m, 0.0, 5).unwrap(), m);
        assert!(add_noise(&m, -1.0, 5).is_err());
    }
}
