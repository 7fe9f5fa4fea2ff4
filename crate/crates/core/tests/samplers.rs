use banditlab::neural::{Architecture, Batch};
use banditlab::samplers::{
    const_sgd_step, gaussian_kl, posterior_sample_choose, sgfs_step, softplus_inverse, FisherEma, SgfsConfig,
    VariationalNet,
};
use banditlab::SimRng;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

proptest! {
    #[test]
    fn fisher_ema_stays_in_the_envelope(grads in prop::collection::vec(-50.0f64..50.0, 1..200),
                                        start in 0.0f64..100.0, decay in 0.01f64..0.99) {
        let mut ema = FisherEma::from_diag(vec![start], decay).unwrap();
        let mut lo = start;
        let mut hi = start;
        for g in grads {
            ema.update(&[g]);
            lo = lo.min(g * g);
            hi = hi.max(g * g);
            let d = ema.diag()[0];
            prop_assert!(d >= lo * (1.0 - 1e-12) && d <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gaussian_kl_is_nonnegative(mu in -10.0f64..10.0, sq in 1e-3f64..10.0, sp in 1e-3f64..10.0) {
        prop_assert!(gaussian_kl(mu, sq, sp) >= -1e-12);
    }
}

#[test]
fn fisher_ema_fixed_point() {
    let mut ema = FisherEma::new(3, 0.9).unwrap();
    for _ in 0..1000 {
        ema.update(&[2.0, -0.5, 0.0]);
    }
    let expected = [4.0, 0.25, 0.0];
    for (d, e) in ema.diag().iter().zip(expected) {
        assert!((d - e).abs() < 1e-12);
    }
    assert_eq!(gaussian_kl(0.0, 1.3, 1.3), 0.0);
}

fn small_problem(seed: u64) -> (VariationalNet, Batch) {
    let mut r = rng(seed);
    let arch = Architecture::new(3, &[5], 2, false).unwrap();
    let n = arch.num_params();
    let mu: Vec<f64> = (0..n).map(|_| 0.6 * r.sample::<f64, _>(StandardNormal)).collect();
    let rho: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..0.5)).collect();
    let vnet = VariationalNet::from_parts(arch, mu, rho, 0.7, 0.4).unwrap();
    let batch = Batch {
        inputs: DMatrix::from_fn(3, 6, |_, _| r.sample(StandardNormal)),
        actions: (0..6).map(|i| i % 2).collect(),
        rewards: (0..6).map(|_| r.sample(StandardNormal)).collect(),
    };
    (vnet, batch)
}

#[test]
fn bbb_gradients_match_finite_differences() {
    for seed in 0..10 {
        let (vnet, batch) = small_problem(seed);
        let nu = vnet.draw_noise(&mut rng(seed + 100));
        let total = 40;
        let g = vnet.loss_and_grads_with(&batch, total, &nu);
        let h = 1e-5;
        let p = vnet.mu.len();
        let mut numeric = Vec::with_capacity(2 * p);
        for which in 0..2 {
            for i in 0..p {
                let eval = |delta: f64| {
                    let mut v = vnet.clone();
                    if which == 0 {
                        v.mu[i] += delta;
                    } else {
                        v.rho[i] += delta;
                    }
                    v.loss_and_grads_with(&batch, total, &nu).loss
                };
                numeric.push((eval(h) - eval(-h)) / (2.0 * h));
            }
        }
        let analytic = DVector::from_iterator(2 * p, g.grad_mu.iter().chain(&g.grad_rho).copied());
        let numeric = DVector::from_vec(numeric);
        let rel = (&analytic - &numeric).norm() / analytic.norm().max(numeric.norm());
        assert!(rel < 1e-4, "seed {seed}: relative error {rel}");
    }
}

#[test]
fn collapsed_spread_samples_the_mean() {
    let (mut vnet, _) = small_problem(3);
    vnet.rho.fill(-40.0);
    let mut r = rng(4);
    for _ in 0..50 {
        let w = vnet.sample_weights(&mut r);
        for (a, b) in w.iter().zip(&vnet.mu) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
        let x: Vec<f64> = (0..3).map(|_| r.sample(StandardNormal)).collect();
        let greedy = vnet.arch().predict(&vnet.mu, &x);
        let best = if greedy[0] >= greedy[1] { 0 } else { 1 };
        assert_eq!(posterior_sample_choose(&vnet, &x, &mut r), best);
    }
}

#[test]
fn weight_samples_have_the_variational_moments() {
    let (vnet, _) = small_problem(5);
    let mut r = rng(6);
    let draws = 100_000;
    let p = vnet.mu.len();
    let mut sum = vec![0.0; p];
    let mut sq = vec![0.0; p];
    for _ in 0..draws {
        for (i, w) in vnet.sample_weights(&mut r).into_iter().enumerate() {
            let c = w - vnet.mu[i];
            sum[i] += c;
            sq[i] += c * c;
        }
    }
    for i in 0..p {
        let sd = vnet.sigma(i);
        let mean = sum[i] / draws as f64;
        let emp_sd = (sq[i] / draws as f64).sqrt();
        assert!(mean.abs() < 0.02 * sd.max(vnet.mu[i].abs()), "mean {i}");
        assert!((emp_sd / sd - 1.0).abs() < 0.02, "sd {i}: {emp_sd} vs {sd}");
    }
}

#[test]
fn tied_means_are_split_by_weight_noise() {
    let arch = Architecture::new(2, &[4], 2, false).unwrap();
    let n = arch.num_params();
    let vnet = VariationalNet::from_parts(arch, vec![0.0; n], vec![softplus_inverse(0.3); n], 1.0, 1.0).unwrap();
    let mut r = rng(7);
    let trials = 20_000;
    let first = (0..trials)
        .filter(|_| posterior_sample_choose(&vnet, &[1.0, -1.0], &mut r) == 0)
        .count() as f64;
    let sd = (trials as f64 * 0.25).sqrt();
    assert!((first - trials as f64 / 2.0).abs() < 3.0 * sd, "{first}");
}

fn sgfs_cfg(lr: f64, burn_in: usize, noise_scale: f64) -> SgfsConfig {
    SgfsConfig {
        lr,
        burn_in,
        ema_decay: 0.9,
        noise_scale,
        n: 1,
        s: 1,
    }
}

#[test]
fn sgfs_without_noise_ignores_the_rng() {
    let ema = FisherEma::from_diag(vec![0.5, 2.0, 1e-3], 0.9).unwrap();
    let grad = [0.3, -1.0, 2.0];
    let mut a = vec![1.0, 2.0, 3.0];
    let mut b = a.clone();
    let cfg = sgfs_cfg(0.1, 0, 0.0);
    sgfs_step(&mut a, &grad, &ema, &cfg, 5, &mut rng(1));
    sgfs_step(&mut b, &grad, &ema, &cfg, 5, &mut rng(2));
    assert_eq!(a, b);

    // Before burn-in the noise is off even with a positive scale.
    let noisy = sgfs_cfg(0.1, 10, 1.0);
    let mut c = vec![1.0, 2.0, 3.0];
    sgfs_step(&mut c, &grad, &ema, &noisy, 9, &mut rng(3));
    assert_eq!(a, c);
    let mut d = vec![1.0, 2.0, 3.0];
    sgfs_step(&mut d, &grad, &ema, &noisy, 10, &mut rng(3));
    assert_ne!(a, d);
}

/// Long-run variance of SGFS on `U(θ) = λθ²/2` with a fixed Fisher estimate.
fn sgfs_quadratic_variance(lambda: f64, fisher: f64, lr: f64, seed: u64) -> f64 {
    let ema = FisherEma::from_diag(vec![fisher], 0.9).unwrap();
    let cfg = sgfs_cfg(lr, 0, 1.0);
    let mut r = rng(seed);
    let mut theta = [0.0];
    let (burn, steps) = (1_000, 400_000);
    let mut sq = 0.0;
    for t in 0..burn + steps {
        let grad = [lambda * theta[0]];
        sgfs_step(&mut theta, &grad, &ema, &cfg, t, &mut r);
        if t >= burn {
            sq += theta[0] * theta[0];
        }
    }
    sq / steps as f64
}

#[test]
fn sgfs_quadratic_variance_matches_analysis() {
    let lambda = 1.0;
    let analytic = |d: f64, eps: f64| 1.0 / (lambda * (1.0 + eps * (1.0 - lambda / d)));

    // Matched Fisher: the variance is 1/λ for every step size.
    for eps in [0.5, 0.1] {
        let v = sgfs_quadratic_variance(lambda, lambda, eps, 1);
        assert!((v * lambda - 1.0).abs() < 0.03, "eps {eps}: {v}");
    }

    // Underestimated Fisher: smaller steps give a smaller, more accurate variance.
    let d = 0.5;
    let big = sgfs_quadratic_variance(lambda, d, 0.5, 2);
    let small = sgfs_quadratic_variance(lambda, d, 0.25, 3);
    assert!((big / analytic(d, 0.5) - 1.0).abs() < 0.03, "{big}");
    assert!((small / analytic(d, 0.25) - 1.0).abs() < 0.03, "{small}");
    assert!(small < big);
}

#[test]
fn const_sgd_converges_on_a_quadratic() {
    // Full batch (S = N), so the step is 2/diag; a Fisher estimate above the
    // curvature keeps every step below the stability threshold 2/curvature.
    let curvature = [0.5, 2.0, 10.0];
    let optimum = [1.0, -3.0, 0.25];
    let ema = FisherEma::from_diag(curvature.iter().map(|c| 1.5 * c).collect(), 0.9).unwrap();
    let cfg = SgfsConfig {
        n: 64,
        s: 64,
        ..sgfs_cfg(1.0, 0, 0.0)
    };
    let mut theta = vec![0.0; 3];
    let mut r = rng(9);
    for t in 0..10_000 {
        let grad: Vec<f64> = (0..3).map(|i| curvature[i] * (theta[i] - optimum[i])).collect();
        const_sgd_step(&mut theta, &grad, &ema, &cfg, t, &mut r);
    }
    for i in 0..3 {
        assert!((theta[i] - optimum[i]).abs() < 1e-6);
    }
}
