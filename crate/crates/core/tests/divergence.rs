use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use scout_core::divergence::*;
use scout_core::targets::{Banana, BananaParams, Gaussian, Target};
use scout_core::CholeskyFactor;

fn random_factor(rng: &mut ChaCha8Rng, k: usize) -> CholeskyFactor {
    let mut data = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..i {
            data[i * k + j] = rng.random_range(-0.5..0.5);
        }
        data[i * k + i] = rng.random_range(0.3..2.0);
    }
    CholeskyFactor::from_row_major(k, data).unwrap()
}

fn draws(rng: &mut ChaCha8Rng, j: usize, k: usize) -> Vec<Vec<f64>> {
    (0..j)
        .map(|_| (0..k).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

/// Central differences of the common-random-number objective over the lower
/// triangle of `L`.
fn objective_difference<T: Target>(
    target: &T,
    x: &[f64],
    l: &CholeskyFactor,
    beta: f64,
    eps: &[Vec<f64>],
    h: f64,
) -> Vec<f64> {
    let k = l.dim();
    let mut out = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..=a {
            let mut plus = l.as_slice().to_vec();
            let mut minus = plus.clone();
            plus[a * k + b] += h;
            minus[a * k + b] -= h;
            let fp = objective_lower_bound(target, x, &CholeskyFactor::from_row_major(k, plus).unwrap(), beta, eps).unwrap();
            let fm = objective_lower_bound(target, x, &CholeskyFactor::from_row_major(k, minus).unwrap(), beta, eps).unwrap();
            out[a * k + b] = (fp - fm) / (2.0 * h);
        }
    }
    out
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn gradient_matches_objective_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gaussian = Gaussian::new(vec![0.5, -1.0, 2.0], vec![1.0, 2.0, 0.5]).unwrap();
    let banana = Banana::new(BananaParams::default()).unwrap();
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 20 {
        attempts += 1;
        assert!(attempts < 200, "too many draws landed on a kink");
        let use_banana = checked % 2 == 1;
        let (target, x): (&dyn Target, Vec<f64>) = if use_banana {
            (&banana, vec![rng.random_range(-10.0..10.0), rng.random_range(-8.0..2.0)])
        } else {
            (&gaussian, (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
        };
        let k = x.len();
        let l = random_factor(&mut rng, k);
        let eps = draws(&mut rng, 10, k);
        let lp_x = target.log_density(&x);
        // The min{0, ·} term has a kink; skip draws that sit on it.
        let near_kink = eps.iter().any(|e| {
            let mut y = vec![0.0; k];
            l.mul_vec(e, &mut y);
            y.iter_mut().zip(&x).for_each(|(y, x)| *y += x);
            (target.log_density(&y) - lp_x).abs() < 1e-3
        });
        if near_kink {
            continue;
        }
        let flat: Vec<f64> = eps.concat();
        let g = gradient_from_draws(&target, &x, lp_x, &l, 0.2, &flat).unwrap();
        let fd = objective_difference(&target, &x, &l, 0.2, &eps, 1e-6);
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let rel = frobenius(&diff) / frobenius(&fd);
        assert!(rel <= 1e-4, "relative error {rel} at x = {x:?}");
        checked += 1;
    }
}

#[test]
fn entropy_gradient_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let k = rng.random_range(1..8);
        let l = random_factor(&mut rng, k);
        let beta = rng.random_range(0.01..2.0);
        let g = entropy_gradient(&l, beta).unwrap();
        for i in 0..k {
            for j in 0..k {
                let expected = if i == j { beta / l.get(i, i) } else { 0.0 };
                assert_eq!(g[i * k + j], expected);
            }
        }
    }
}

/// `𝒥(c I)` for a standard Gaussian at the origin, evaluated with a large
/// common draw set.
#[test]
fn objective_maximiser_matches_grid_search() {
    let target = Gaussian::standard(1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eps = draws(&mut rng, 20_000, 1);
    let beta = 0.2;
    let objective = |c: f64| {
        objective_lower_bound(&target, &[0.0], &CholeskyFactor::scaled_identity(1, c).unwrap(), beta, &eps).unwrap()
    };
    let grid: Vec<f64> = (1..400).map(|i| i as f64 * 0.005).collect();
    let best = grid
        .iter()
        .copied()
        .max_by(|a, b| objective(*a).partial_cmp(&objective(*b)).unwrap())
        .unwrap();
    // At the mode every draw is downhill: 𝒥 = β log c − (1 + β) c² E[ε²]/2 +
    // const, maximised at c² = β / (1 + β).
    let analytic = (beta / (1.0 + beta)).sqrt();
    assert!((best - analytic).abs() < 0.02, "grid {best} vs analytic {analytic}");

    // Gradient ascent on the same draws climbs to the grid maximiser.
    let flat: Vec<f64> = eps.concat();
    let mut c = 2.0;
    for _ in 0..2_000 {
        let l = CholeskyFactor::scaled_identity(1, c).unwrap();
        let g = gradient_from_draws(&target, &[0.0], target.log_density(&[0.0]), &l, beta, &flat).unwrap();
        c += 0.05 * g[0];
    }
    assert!((c - best).abs() < 0.01, "ascent {c} vs grid {best}");
}

#[test]
fn estimator_is_unbiased_across_draw_counts() {
    // Averaging many single-draw gradients agrees with one large-J gradient.
    let target = Banana::new(BananaParams::default()).unwrap();
    let x = [3.0, -1.5];
    let l = CholeskyFactor::from_rows(&[[1.5, 0.0], [-0.4, 0.8]]).unwrap();
    let lp_x = target.log_density(&x);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 200_000;
    let big: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
    let pooled = gradient_from_draws(&target, &x, lp_x, &l, 0.2, &big).unwrap();
    let mut mean = vec![0.0; 4];
    let mut sq = vec![0.0; 4];
    for _ in 0..n {
        let e: Vec<f64> = (0..2).map(|_| rng.sample(StandardNormal)).collect();
        let g = gradient_from_draws(&target, &x, lp_x, &l, 0.2, &e).unwrap();
        for i in 0..4 {
            mean[i] += g[i] / n as f64;
            sq[i] += g[i] * g[i] / n as f64;
        }
    }
    for i in 0..4 {
        let se = ((sq[i] - mean[i] * mean[i]) / n as f64).sqrt();
        // Difference of two independent means: allow 4 combined standard errors.
        assert!((mean[i] - pooled[i]).abs() <= 4.0 * se * 2f64.sqrt() + 1e-12, "entry {i}");
    }
}

#[test]
fn deep_tail_gradients_are_clipped() {
    let target = Banana::new(BananaParams::default()).unwrap();
    let x = [60.0, -240.0];
    let l = CholeskyFactor::scaled_identity(2, 40.0).unwrap();
    let hyper = DmHyperparams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = gradient_estimate(&target, &x, &l, &hyper, &mut rng).unwrap();
    let h = hyper.clip_threshold();
    assert_eq!(h, 5000.0);
    assert!(g.any_clipped());
    assert!(g.matrix.iter().all(|v| v.abs() <= h));
    assert_eq!(g.get(0, 1), 0.0);
    let next = update_cholesky(&l, &g, hyper.gamma);
    for (a, b) in next.as_slice().iter().zip(l.as_slice()) {
        assert!((a - b).abs() <= hyper.gamma * h + 1e-9);
    }
    assert!(next.diagonal().iter().all(|d| *d >= scout_core::linalg::DIAG_FLOOR));
}

#[test]
fn estimate_reports_every_draw() {
    let target = Gaussian::standard(3);
    let l = CholeskyFactor::scaled_identity(3, 1.0).unwrap();
    let hyper = DmHyperparams {
        j_draws: 7,
        ..DmHyperparams::default()
    };
    let mut a = ChaCha8Rng::seed_from_u64(6);
    let mut b = ChaCha8Rng::seed_from_u64(6);
    let g = gradient_estimate(&target, &[0.1, 0.2, 0.3], &l, &hyper, &mut a).unwrap();
    assert_eq!(g.draws_used, 7);
    assert_eq!(g, gradient_estimate(&target, &[0.1, 0.2, 0.3], &l, &hyper, &mut b).unwrap());
}

proptest! {
    #[test]
    fn clipping_is_idempotent_and_bounded(
        values in proptest::collection::vec(-1e6f64..1e6, 1..40),
        h in 1e-3f64..1e4,
    ) {
        let once = clip_gradient(&values, h);
        prop_assert_eq!(clip_gradient(&once, h), once.clone());
        for (c, v) in once.iter().zip(&values) {
            prop_assert!(c.abs() <= h);
            if v.abs() <= h {
                prop_assert_eq!(c, v);
            } else {
                prop_assert_eq!(*c, h.copysign(*v));
            }
        }
    }

    #[test]
    fn entropy_of_diagonal_factor(diag in proptest::collection::vec(0.01f64..10.0, 1..6)) {
        let k = diag.len();
        let mut data = vec![0.0; k * k];
        for (i, d) in diag.iter().enumerate() {
            data[i * k + i] = *d;
        }
        let l = CholeskyFactor::from_row_major(k, data).unwrap();
        let expected = 0.5 * k as f64 * (2.0 * core::f64::consts::PI * core::f64::consts::E).ln()
            + diag.iter().map(|d| d.ln()).sum::<f64>();
        assert_relative_eq!(gaussian_entropy(&l), expected, epsilon = 1e-12);
    }
}
