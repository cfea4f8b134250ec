use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scout_core::rng::{stream, Stream};
use scout_core::samplers::*;
use scout_core::targets::{Banana, BananaParams, Gaussian, Target};
use scout_core::CholeskyFactor;

fn column_stats(r: &RunResult) -> (Vec<f64>, Vec<f64>) {
    let d = r.dim;
    let n = r.len() as f64;
    let mut mean = vec![0.0; d];
    for row in r.rows() {
        for i in 0..d {
            mean[i] += row[i] / n;
        }
    }
    let mut var = vec![0.0; d];
    for row in r.rows() {
        for i in 0..d {
            var[i] += (row[i] - mean[i]).powi(2) / (n - 1.0);
        }
    }
    (mean, var)
}

#[test]
fn every_sampler_is_deterministic() {
    let target = Banana::new(BananaParams::default()).unwrap();
    for kind in SamplerKind::ALL {
        let mut c = SamplerConfig::new(kind, 3_000, vec![0.0, 0.0]);
        c.seed = 17;
        c.cholesky_stride = Some(500);
        let a = run(&target, &c).unwrap();
        let b = run(&target, &c).unwrap();
        let bits = |r: &RunResult| r.samples.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b), "{kind}");
        assert_eq!(a, b, "{kind}");
        assert_eq!(a.len(), 3_000);
        assert_eq!(a.kind, kind);
        c.seed = 18;
        assert_ne!(run(&target, &c).unwrap().samples, a.samples, "{kind}");
    }
}

/// With `γ = 0` every sampler is a fixed-kernel MH chain for `N(0, I₂)`.
#[test]
fn fixed_kernels_recover_standard_normal_moments() {
    let target = Gaussian::standard(2);
    for kind in SamplerKind::ALL {
        let mut c = SamplerConfig::new(kind, 50_000, vec![0.0, 0.0]);
        c.seed = 3;
        c.dm.gamma = 0.0;
        c.scout.scale = 3.0;
        c.rwm.scale = 2.0;
        c.mala.step = 1.2;
        let r = run(&target, &c).unwrap();
        let (mean, var) = column_stats(&r);
        for i in 0..2 {
            assert!(mean[i].abs() < 0.05, "{kind}: mean {mean:?}");
            assert!((var[i] - 1.0).abs() < 0.1, "{kind}: variance {var:?}");
        }
        if let Some(f) = &r.final_state.factor {
            if kind != SamplerKind::Arwm {
                assert_eq!(f, &CholeskyFactor::scaled_identity(2, c.dm.sigma).unwrap());
            }
        }
    }
}

#[test]
fn scout_without_swaps_leaves_main_chain_untouched() {
    let target = Banana::new(BananaParams::default()).unwrap();
    let mut c = SamplerConfig::new(SamplerKind::Scout, 5_000, vec![1.0, -1.0]);
    c.seed = 5;
    c.scout.temperature = 1.0;
    c.scout.swap_interval = None;
    let scout = run_scout_perpetual(&target, &c).unwrap();
    let dm = run_dm_perpetual(&target, &c).unwrap();
    assert_eq!(scout.samples, dm.samples);
    assert_eq!(scout.accepted, dm.accepted);
    assert_eq!(scout.final_state.factor, dm.final_state.factor);
    assert!(scout.swaps.is_empty());
    assert_eq!(scout.final_state.tallies.len(), 2);
}

#[test]
fn swaps_are_attempted_every_k_iterations() {
    let target = Banana::new(BananaParams::default()).unwrap();
    let mut c = SamplerConfig::new(SamplerKind::Scout, 1_000, vec![0.0, 0.0]);
    c.scout.swap_interval = Some(20);
    let r = run(&target, &c).unwrap();
    let at: Vec<usize> = r.swaps.iter().map(|s| s.iteration).collect();
    assert_eq!(at, (0..1_000).step_by(20).collect::<Vec<_>>());
    // From a shared start the first swap compares equal densities.
    assert!(r.swaps[0].accepted);
}

#[test]
fn mala_without_drift_is_rwm() {
    struct Blind(Gaussian);
    impl Target for Blind {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn log_density(&self, x: &[f64]) -> f64 {
            self.0.log_density(x)
        }
        fn grad_log_density(&self, _x: &[f64], g: &mut [f64]) {
            g.fill(0.0);
        }
    }
    let target = Blind(Gaussian::new(vec![1.0, -2.0, 0.0], vec![1.0, 3.0, 0.5]).unwrap());
    let mut c = SamplerConfig::new(SamplerKind::Mala, 4_000, vec![0.0; 3]);
    c.seed = 9;
    c.mala.step = 0.7;
    c.rwm.scale = 0.7;
    let mala = run_mala(&target, &c).unwrap();
    let rwm = run_rwm(&target, &c).unwrap();
    assert_eq!(mala.samples, rwm.samples);
    assert_eq!(mala.accepted, rwm.accepted);
}

#[test]
fn half_ratio_accepts_half_the_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 100_000;
    let hits = (0..n).filter(|_| accept_log_ratio(0.5f64.ln(), &mut rng)).count();
    let rate = hits as f64 / n as f64;
    assert!((rate - 0.5).abs() < 0.005, "{rate}");
    assert!(accept_log_ratio(0.0, &mut rng));
    assert!(accept_log_ratio(3.0, &mut rng));
    assert!(!accept_log_ratio(f64::NEG_INFINITY, &mut rng));
}

#[test]
fn dm_adapts_to_anisotropic_gaussian() {
    let target = Gaussian::new(vec![0.0, 0.0], vec![1.0, 10.0]).unwrap();
    for seed in 0..3 {
        let mut c = SamplerConfig::new(SamplerKind::Dm, 20_000, vec![0.0, 0.0]);
        c.seed = seed;
        let r = run_dm_perpetual(&target, &c).unwrap();
        let cov = r.final_state.factor.unwrap().covariance();
        let ratio = cov[3] / cov[0];
        assert!((25.0..=400.0).contains(&ratio), "seed {seed}: ratio {ratio}");
    }
}

fn brute_nearest(positions: &[Vec<f64>], z: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in positions.iter().enumerate() {
        let d = |q: &[f64]| q.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        if d(p) < d(&positions[best]) {
            best = i;
        }
    }
    best
}

#[test]
fn nearest_lookup_matches_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut positions: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    // Duplicates exercise the lowest-index tie rule.
    positions.push(positions[7].clone());
    positions.push(positions[30].clone());
    let factors: Vec<_> = (0..positions.len())
        .map(|i| CholeskyFactor::scaled_identity(3, 1.0 + i as f64).unwrap())
        .collect();
    let bank = CholeskyBank::new(positions.clone(), factors).unwrap();
    for q in 0..1_000 {
        let z: Vec<f64> = if q % 10 == 0 {
            positions[q % positions.len()].clone()
        } else {
            (0..3).map(|_| rng.random_range(-6.0..6.0)).collect()
        };
        let i = brute_nearest(&positions, &z);
        assert_eq!(bank.nearest_index(&z), i);
        assert_eq!(nearest_bank_factor(&bank, &z), &bank.factors()[i]);
    }
    assert_eq!(bank.nearest_index(&positions[7]), 7);
    assert_eq!(bank.nearest_index(&positions[30]), 30);

    let single = CholeskyBank::new(vec![vec![0.0; 3]], vec![CholeskyFactor::scaled_identity(3, 2.0).unwrap()]).unwrap();
    assert_eq!(single.nearest_index(&[100.0, -3.0, 2.0]), 0);
}

fn normal_log_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * sd * sd).ln() - (x - mean).powi(2) / (2.0 * sd * sd)
}

#[test]
fn two_factor_acceptance_matches_hand_calculation() {
    // Entries at −1 and +1 split the line at 0.
    let bank = CholeskyBank::new(
        vec![vec![-1.0], vec![1.0]],
        vec![
            CholeskyFactor::scaled_identity(1, 0.5).unwrap(),
            CholeskyFactor::scaled_identity(1, 2.0).unwrap(),
        ],
    )
    .unwrap();
    let kernel = FrozenKernel::new(&bank);
    let target = Gaussian::standard(1);
    let lp = |v: f64| -0.5 * v * v;
    let cases = [(-0.8, 0.6), (0.6, -0.8), (-0.3, -0.9), (2.5, 0.1), (-4.0, 3.0)];
    for (x, y) in cases {
        let sx = if x < 0.0 { 0.5 } else { 2.0 };
        let sy = if y < 0.0 { 0.5 } else { 2.0 };
        let expected = lp(y) - lp(x) + normal_log_pdf(x, y, sy) - normal_log_pdf(y, x, sx);
        let got = kernel.log_acceptance(&[x], target.log_density(&[x]), &[y], target.log_density(&[y]));
        assert!((got - expected).abs() <= 1e-12, "({x}, {y}): {got} vs {expected}");
    }

    // A single-entry bank gives a plain Metropolis ratio.
    let single = CholeskyBank::new(vec![vec![0.0]], vec![CholeskyFactor::scaled_identity(1, 0.7).unwrap()]).unwrap();
    let k1 = FrozenKernel::new(&single);
    for (x, y) in cases {
        assert_eq!(k1.log_acceptance(&[x], lp(x), &[y], lp(y)), lp(y) - lp(x));
    }
}

#[test]
fn phase_two_replays_from_boundary() {
    let target = Banana::new(BananaParams::default()).unwrap();
    let mut c = SamplerConfig::new(SamplerKind::DmFinite, 6_000, vec![0.0, 0.0]);
    c.seed = 21;
    let r = run_dm_finite(&target, &c).unwrap();
    let f = r.phase_boundary.unwrap();
    assert_eq!(f, 3_000);
    let bank = r.bank.as_ref().unwrap();
    assert_eq!(bank.len(), 300);
    assert!(bank.iterations().iter().all(|&i| i <= f));
    let kernel = FrozenKernel::new(bank);

    let mut x = r.row(f - 1).to_vec();
    let mut lp = target.log_density(&x);
    let mut rng = stream(c.seed, Stream::Frozen);
    let mut mid = None;
    for t in f..r.len() {
        if t == 4_500 {
            mid = Some((x.clone(), lp, rng.clone()));
        }
        let step = kernel.step(&target, &mut x, &mut lp, &mut rng).unwrap();
        assert_eq!(step.accepted, r.accepted[t], "iteration {t}");
        assert_eq!(x.as_slice(), r.row(t));
    }

    // A snapshot taken mid-phase reproduces the remaining decisions.
    let (mut x, mut lp, mut rng) = mid.unwrap();
    for t in 4_500..r.len() {
        let step = kernel.step(&target, &mut x, &mut lp, &mut rng).unwrap();
        assert_eq!(step.accepted, r.accepted[t]);
    }
}

#[test]
fn bank_is_constant_through_phase_two() {
    let target = Banana::new(BananaParams::default()).unwrap();
    for kind in [SamplerKind::DmFinite, SamplerKind::ScoutFinite] {
        let mut c = SamplerConfig::new(kind, 4_000, vec![0.0, 0.0]);
        c.seed = 2;
        c.finite.threshold = Some(1_000);
        c.finite.bank_size = Some(50);
        let r = run(&target, &c).unwrap();
        let (start, end) = r.bank_fingerprints.unwrap();
        assert_eq!(start, end, "{kind}");
        assert_eq!(end, r.bank.as_ref().unwrap().fingerprint());
        assert_eq!(r.phase_boundary, Some(1_000));
        assert_eq!(r.bank.as_ref().unwrap().len(), 50);
    }
}

#[test]
fn pt_records_cold_chain_and_swaps() {
    let target = Gaussian::standard(2);
    let mut c = SamplerConfig::new(SamplerKind::Pt, 2_000, vec![0.0, 0.0]);
    c.pt.chains = 4;
    let r = run_pt(&target, &c).unwrap();
    assert_eq!(r.swaps.len(), 2_000);
    assert!(r.swaps.iter().all(|s| s.pair < 3));
    assert_eq!(r.final_state.tallies.len(), 4);
    assert_eq!(r.main_tally().attempted, 2_000);
    assert_eq!(r.final_state.x.as_slice(), r.row(1_999));
}

#[test]
fn invalid_configs_are_rejected() {
    let target = Gaussian::standard(2);
    let mut c = SamplerConfig::new(SamplerKind::DmFinite, 100, vec![0.0, 0.0]);
    c.finite.threshold = Some(100);
    assert!(run(&target, &c).is_err());
    let c = SamplerConfig::new(SamplerKind::Rwm, 100, vec![0.0]);
    assert!(run(&target, &c).is_err());
    let mut c = SamplerConfig::new(SamplerKind::Scout, 100, vec![0.0, 0.0]);
    c.scout.temperature = 1.5;
    assert!(run(&target, &c).is_err());
    let mut c = SamplerConfig::new(SamplerKind::Rwm, 100, vec![f64::NAN, 0.0]);
    c.rwm.scale = 1.0;
    assert!(run(&target, &c).is_err());
}
