use core::f64::consts::PI;

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scout_core::targets::*;

fn central_difference<T: Target>(t: &T, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (t.log_density(&a) - t.log_density(&b)) / (2.0 * h)
        })
        .collect()
}

fn assert_gradient_matches<T: Target>(t: &T, x: &[f64], rel: f64) {
    let mut g = vec![0.0; x.len()];
    t.grad_log_density(x, &mut g);
    let fd = central_difference(t, x, 1e-5);
    let scale = fd.iter().map(|v| v.abs()).fold(1.0, f64::max);
    for (i, (a, b)) in g.iter().zip(&fd).enumerate() {
        assert!((a - b).abs() <= rel * scale, "coordinate {i}: analytic {a} vs difference {b} at {x:?}");
    }
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, spread: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-spread..spread)).collect()
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rotated = Banana::new(BananaParams {
        curvature: 0.05,
        scale_x: 3.0,
        scale_y: 0.7,
        rotation: 0.6,
        translation: vec![1.0, -2.0, 0.5],
        plane: (2, 0),
        scale_perp: 1.5,
    })
    .unwrap();
    for _ in 0..10 {
        assert_gradient_matches(&Banana::new(BananaParams::default()).unwrap(), &random_point(&mut rng, 2, 8.0), 1e-6);
        assert_gradient_matches(&rotated, &random_point(&mut rng, 3, 4.0), 1e-6);
        assert_gradient_matches(&BananaMixture::default_double_banana(), &random_point(&mut rng, 2, 20.0), 1e-6);
        assert_gradient_matches(&BananaMixture::default_banana_bunch(), &random_point(&mut rng, 3, 45.0), 1e-6);
        assert_gradient_matches(&BasisVector::default(), &random_point(&mut rng, 4, 12.0), 1e-6);
        assert_gradient_matches(&Gaussian::new(vec![1.0, -1.0], vec![0.5, 3.0]).unwrap(), &random_point(&mut rng, 2, 3.0), 1e-6);
    }
}

#[test]
fn horseshoe_gradient_matches_finite_differences() {
    let model = Horseshoe::new(generate_horseshoe_data(3, 60, 6).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let mut theta = random_point(&mut rng, model.dim(), 1.0);
        for (j, b) in model.data().true_coefficients.iter().enumerate() {
            theta[j] += b;
        }
        assert_gradient_matches(&model, &theta, 1e-5);
    }
}

#[test]
fn banana_apex_has_gaussian_normalising_constant() {
    let t = Banana::new(BananaParams {
        curvature: 0.1,
        ..BananaParams::default()
    })
    .unwrap();
    assert_relative_eq!(t.log_density(&[0.0, 0.0]), -(2.0 * PI * 10.0).ln(), epsilon = 1e-14);
    assert_eq!(t.apex(), vec![0.0, 0.0]);
}

#[test]
fn banana_mean_follows_curvature() {
    let t = Banana::new(BananaParams::default()).unwrap();
    let m = t.mean();
    assert_eq!(m[0], 0.0);
    assert_relative_eq!(m[1], -0.067 * 100.0, epsilon = 1e-12);
}

#[test]
fn double_banana_is_mirror_symmetric_with_empty_middle() {
    let t = BananaMixture::default_double_banana();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let x = random_point(&mut rng, 2, 30.0);
        assert_relative_eq!(t.log_density(&x), t.log_density(&[-x[0], x[1]]), epsilon = 1e-12);
    }
    assert_eq!(t.true_mean().unwrap(), vec![0.0, -25.0]);
    let mode = t.modes()[0].clone();
    assert!(t.log_density(&[0.0, -25.0]) - t.log_density(&mode) < (1e-3f64).ln());
}

#[test]
fn basis_vector_matches_hand_evaluation() {
    let t = BasisVector::default();
    // At 10·e₁ the own component contributes (2π)⁻², six components sit at
    // squared distance 200 and the opposite one at 400.
    let expected = (0.125 * (2.0 * PI).powi(-2) * (1.0 + 6.0 * (-100.0f64).exp() + (-200.0f64).exp())).ln();
    assert_relative_eq!(t.log_density(&[10.0, 0.0, 0.0, 0.0]), expected, epsilon = 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let x = random_point(&mut rng, 4, 15.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_relative_eq!(t.log_density(&x), t.log_density(&neg), epsilon = 1e-12);
    }
    assert_eq!(basis_vector_log_density(&[0.0; 3]).is_err(), true);
}

#[test]
fn banana_bunch_is_invariant_under_its_symmetries() {
    let t = BananaMixture::default_banana_bunch();
    assert_eq!(t.components().len(), 12);
    assert_eq!(t.modes().len(), 6);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let x = random_point(&mut rng, 3, 45.0);
        let lp = t.log_density(&x);
        for y in [
            [x[1], x[0], x[2]],
            [x[2], x[1], x[0]],
            [x[0], x[2], x[1]],
            [-x[0], x[1], x[2]],
            [x[0], -x[1], x[2]],
            [x[0], x[1], -x[2]],
        ] {
            assert_relative_eq!(lp, t.log_density(&y), epsilon = 1e-10, max_relative = 1e-12);
        }
    }
}

#[test]
fn mixtures_agree_with_naive_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for mixture in [BananaMixture::default_double_banana(), BananaMixture::default_banana_bunch()] {
        let n = mixture.components().len() as f64;
        for _ in 0..200 {
            let x = random_point(&mut rng, mixture.dim(), 30.0);
            let naive: f64 = mixture
                .components()
                .iter()
                .map(|c| c.log_density(&x).exp())
                .sum::<f64>()
                / n;
            if naive > 1e-250 {
                assert_relative_eq!(mixture.log_density(&x), naive.ln(), max_relative = 1e-12);
            }
        }
    }
}

/// Mean and second moment of `n` direct draws, with their standard errors.
fn direct_moments<T: Target>(t: &T, n: usize, seed: u64) -> [(Vec<f64>, Vec<f64>); 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = t.dim();
    let mut s = [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    for _ in 0..n {
        let x = t.direct_sample(&mut rng).expect("direct sampling");
        for i in 0..d {
            let v2 = x[i] * x[i];
            s[0][i] += x[i];
            s[1][i] += v2;
            s[2][i] += v2;
            s[3][i] += v2 * v2;
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = s[0].iter().map(|v| v / nf).collect();
    let m2: Vec<f64> = s[1].iter().map(|v| v / nf).collect();
    let se_mean = (0..d).map(|i| ((m2[i] - mean[i] * mean[i]) / nf).sqrt()).collect();
    let se_m2 = (0..d).map(|i| ((s[3][i] / nf - m2[i] * m2[i]) / nf).sqrt()).collect();
    [(mean, se_mean), (m2, se_m2)]
}

fn assert_within_three_se(label: &str, est: &(Vec<f64>, Vec<f64>), truth: &[f64]) {
    for (i, ((e, se), t)) in est.0.iter().zip(&est.1).zip(truth).enumerate() {
        assert!((e - t).abs() <= 3.0 * se, "{label}[{i}]: estimate {e} vs declared {t} (se {se})");
    }
}

#[test]
fn direct_samples_match_declared_moments() {
    let targets: Vec<(&str, Box<dyn Target>)> = vec![
        ("banana", Box::new(Banana::new(BananaParams::default()).unwrap())),
        ("double banana", Box::new(BananaMixture::default_double_banana())),
        ("banana bunch", Box::new(BananaMixture::default_banana_bunch())),
        ("basis vector", Box::new(BasisVector::default())),
        ("gaussian", Box::new(Gaussian::new(vec![2.0, -1.0], vec![0.5, 3.0]).unwrap())),
    ];
    for (k, (label, t)) in targets.iter().enumerate() {
        let [mean, m2] = direct_moments(t, 1_000_000, 100 + k as u64);
        assert_within_three_se(label, &mean, &t.true_mean().unwrap());
        assert_within_three_se(label, &m2, &t.true_second_moment().unwrap());
    }
}

#[test]
fn banana_bunch_second_moment_is_calibrated() {
    let t = BananaMixture::default_banana_bunch();
    for v in t.true_second_moment().unwrap() {
        assert_relative_eq!(v, 400.0, max_relative = 1e-12);
    }
    let [mean, m2] = direct_moments(&t, 1_000_000, 7);
    for (m, s) in mean.0.iter().zip(&m2.0) {
        assert!(m.abs() < 0.1);
        assert!((s - 400.0).abs() < 4.0);
    }
}

#[test]
fn horseshoe_likelihood_matches_direct_residuals_at_ols() {
    let data = generate_horseshoe_data(21, 200, 10).unwrap();
    let model = Horseshoe::new(data.clone()).unwrap();
    let beta = model.ols().unwrap();
    let (n, p) = (data.n, data.p);
    let mut rss = 0.0;
    for i in 0..n {
        let fit: f64 = (0..p).map(|j| data.design[i * p + j] * beta[j]).sum();
        rss += (data.response[i] - fit).powi(2);
    }
    // Normal equations: the residual is orthogonal to every column.
    for j in 0..p {
        let dot: f64 = (0..n)
            .map(|i| {
                let fit: f64 = (0..p).map(|k| data.design[i * p + k] * beta[k]).sum();
                data.design[i * p + j] * (data.response[i] - fit)
            })
            .sum();
        assert!(dot.abs() < 1e-8);
    }
    let log_sigma = 0.1;
    let expected = -0.5 * n as f64 * (2.0 * PI).ln() - n as f64 * log_sigma - 0.5 * rss * (-2.0 * log_sigma).exp();
    assert_relative_eq!(model.log_likelihood(&beta, log_sigma), expected, max_relative = 1e-10);

    // With very wide local scales the prior on β is flat, so the posterior
    // moves exactly like the likelihood.
    let pack = |b: &[f64]| {
        let mut theta = b.to_vec();
        theta.extend(std::iter::repeat(30.0).take(p));
        theta.push(0.0);
        theta.push(log_sigma);
        theta
    };
    let shifted: Vec<f64> = beta.iter().enumerate().map(|(j, b)| b + 0.01 * j as f64).collect();
    let d_post = model.log_density(&pack(&shifted)) - model.log_density(&pack(&beta));
    let d_lik = model.log_likelihood(&shifted, log_sigma) - model.log_likelihood(&beta, log_sigma);
    assert_relative_eq!(d_post, d_lik, max_relative = 1e-9);
}

#[test]
fn horseshoe_data_is_deterministic_and_structured() {
    let a = generate_horseshoe_data(1, 50, 20).unwrap();
    assert_eq!(a, generate_horseshoe_data(1, 50, 20).unwrap());
    assert_ne!(a.design, generate_horseshoe_data(2, 50, 20).unwrap().design);
    assert_eq!(&a.true_coefficients[..10], &HORSESHOE_SIGNAL);
    assert!(a.true_coefficients[10..].iter().all(|b| *b == 0.0));
    assert!(generate_horseshoe_data(1, 50, 7).is_err());
    let model = Horseshoe::new(a).unwrap();
    assert_eq!(model.dim(), 42);
    assert_eq!(model.moment_coordinates(), 0..20);
    assert!(horseshoe_log_posterior(&model, &[0.0; 41]).is_err());
}

#[test]
fn non_finite_inputs_are_rejected() {
    assert!(banana_log_density(&BananaParams::default(), &[f64::NAN, 0.0]).is_err());
    assert!(double_banana_log_density(&[0.0, f64::INFINITY]).is_err());
    assert!(banana_bunch_log_density(&[0.0, 0.0]).is_err());
    assert!(checked_log_density(&Gaussian::standard(2), &[0.0, 1.0]).is_ok());
}
