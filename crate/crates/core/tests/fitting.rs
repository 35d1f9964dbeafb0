use coadapt_core::{fit_promp, BasisSystem, Demonstration, Trajectory};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const STEPS: usize = 60;

fn sample_demos(
    basis: &BasisSystem,
    mu: &DVector<f64>,
    sd: &DVector<f64>,
    noise: f64,
    count: usize,
    seed: u64,
) -> (Vec<Demonstration>, Vec<DVector<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = basis.design(STEPS);
    let eps = Normal::new(0.0, noise).unwrap();
    let mut demos = Vec::new();
    let mut clean = Vec::new();
    for _ in 0..count {
        let w = DVector::from_fn(mu.len(), |j, _| Normal::new(mu[j], sd[j]).unwrap().sample(&mut rng));
        let y = &phi * w;
        let noisy = DMatrix::from_fn(STEPS + 1, 1, |t, _| y[t] + eps.sample(&mut rng));
        demos.push(Demonstration { states: Trajectory::from_matrix(noisy) });
        clean.push(y);
    }
    (demos, clean)
}

#[test]
fn weight_mean_lies_within_three_standard_errors() {
    let basis = BasisSystem::uniform(5);
    let mu = DVector::from_vec(vec![0.3, -0.5, 1.0, 0.2, -0.1]);
    let sd = DVector::from_vec(vec![0.2, 0.1, 0.3, 0.15, 0.25]);
    let (demos, _) = sample_demos(&basis, &mu, &sd, 0.01, 50, 3);
    let model = fit_promp(&demos, &basis, 1e-8).unwrap();
    for j in 0..5 {
        let se = sd[j] / (50f64).sqrt();
        assert!(
            (model.mu_w[j] - mu[j]).abs() <= 3.0 * se,
            "basis {j}: fitted {} vs true {} (se {se})",
            model.mu_w[j],
            mu[j]
        );
        // the sample variance also recovers the generating spread
        let var = model.sigma_w[(j, j)];
        assert!((var.sqrt() / sd[j] - 1.0).abs() < 0.35, "basis {j}: sd {}", var.sqrt());
    }
}

#[test]
fn reconstruction_error_is_within_the_noise_level() {
    let basis = BasisSystem::uniform(8);
    let mu = DVector::from_fn(8, |j, _| (j as f64 * 0.7).sin());
    let sd = DVector::from_element(8, 0.05);
    let (demos, clean) = sample_demos(&basis, &mu, &sd, 0.02, 1, 9);
    let model = fit_promp(&demos, &basis, 1e-8).unwrap();
    let mean = model.trajectory_distribution(STEPS).unwrap().mean;
    let worst = (0..=STEPS).map(|t| (mean.get(t, 0) - clean[0][t]).abs()).fold(0.0, f64::max);
    assert!(worst < 5.0 * model.sigma_y2.sqrt(), "error {worst}, sigma_y {}", model.sigma_y2.sqrt());
    // the residual estimate itself should be close to the injected noise
    assert!((model.sigma_y2.sqrt() / 0.02 - 1.0).abs() < 0.3);
}
