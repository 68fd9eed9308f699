use hermite_qv::fgn::{fgn_autocovariance, fgn_sample};
use hermite_qv::hermite::{hermite_covariance, kernel_oracle_path};
use hermite_qv::stats::{autocovariance_zero_mean, ks_two_sample, mean, second_moment, skewness};
use hermite_qv::{GridSpec, HermiteGenerator, HermitePathRequest, HermiteParams, KernelOracle, RngSeed};

#[test]
fn fgn_autocovariance_matches_formula() {
    let h = 0.7;
    let lags = [0usize, 1, 2, 10];
    let mut acc = vec![0.0; lags.len()];
    let reps = 200;
    for s in 0..reps {
        let x = fgn_sample(h, 4096, RngSeed::with_stream(3, s)).unwrap();
        for (a, &k) in acc.iter_mut().zip(&lags) {
            *a += autocovariance_zero_mean(&x, k) / reps as f64;
        }
    }
    for (a, &k) in acc.iter().zip(&lags) {
        let r = fgn_autocovariance(h, k);
        assert!((a - r).abs() < 0.03, "lag {k}: {a} vs {r}");
    }
}

struct Marginals {
    z: Vec<[f64; 5]>,
}

/// Values at t = 0.25, 0.5, 0.75, 1 and Z_{0.75} - Z_{0.5} for many q = 2 paths.
fn rosenblatt_marginals(reps: u64) -> Marginals {
    let p = HermiteParams::new(0.7, 2).unwrap();
    let grid = GridSpec::new(1.0, 1 << 10, 1).unwrap();
    let gen = HermiteGenerator::new(p, grid, 16).unwrap();
    let z = (0..reps)
        .map(|s| {
            let v = gen.generate(RngSeed::with_stream(21, s)).into_values();
            [v[256], v[512], v[768], v[1024], v[768] - v[512]]
        })
        .collect();
    Marginals { z }
}

#[test]
fn rosenblatt_generator_second_moments() {
    let h: f64 = 0.7;
    let m = rosenblatt_marginals(20_000);
    let col = |i: usize| -> Vec<f64> { m.z.iter().map(|r| r[i]).collect() };
    let z1 = col(3);
    let v1 = second_moment(&z1);
    assert!((v1 - 1.0).abs() < 0.05, "Var Z_1 = {v1}");

    let cov: f64 = m.z.iter().map(|r| r[1] * r[3]).sum::<f64>() / m.z.len() as f64;
    let expect = hermite_covariance(0.5, 1.0, h);
    assert!((cov - expect).abs() < 0.03, "E Z_.5 Z_1 = {cov}");

    // self-similarity
    for (i, t) in [(0usize, 0.25f64), (1, 0.5), (3, 1.0)] {
        let r = second_moment(&col(i)) / t.powf(2.0 * h);
        assert!((r - 1.0).abs() < 0.05, "t = {t}: {r}");
    }

    // stationary increments over three disjoint windows of length 1/4
    let w0 = second_moment(&col(0));
    let w1: Vec<f64> = m.z.iter().map(|r| r[1] - r[0]).collect();
    let w2 = col(4);
    let target = 0.25f64.powf(2.0 * h);
    for v in [w0, second_moment(&w1), second_moment(&w2)] {
        assert!((v / target - 1.0).abs() < 0.05, "{v} vs {target}");
    }

    // second chaos marginal is right-skewed
    let sk = skewness(&z1);
    assert!(sk > 0.5, "skewness {sk}");
    assert!(mean(&z1).abs() < 0.03);
}

#[test]
fn self_similarity_at_longer_horizon() {
    let h: f64 = 0.7;
    let p = HermiteParams::new(h, 2).unwrap();
    let grid = GridSpec::new(2.0, 1 << 8, 1).unwrap();
    let gen = HermiteGenerator::new(p, grid, 16).unwrap();
    let reps = 20_000;
    let mut acc = [0.0; 3];
    for s in 0..reps {
        let v = gen.generate(RngSeed::with_stream(22, s)).into_values();
        for (a, i) in acc.iter_mut().zip([64usize, 128, 256]) {
            *a += v[i] * v[i] / reps as f64;
        }
    }
    for (a, t) in acc.iter().zip([0.5f64, 1.0, 2.0]) {
        assert!((a / t.powf(2.0 * h) - 1.0).abs() < 0.05, "t = {t}: {a}");
    }
}

#[test]
fn generator_and_kernel_oracle_agree_in_law() {
    let p = HermiteParams::new(0.7, 2).unwrap();
    let reps = 3000;
    let gen = HermiteGenerator::new(p, GridSpec::new(1.0, 1 << 10, 1).unwrap(), 16).unwrap();
    let a: Vec<f64> = (0..reps).map(|s| gen.generate(RngSeed::with_stream(31, s)).terminal()).collect();
    let oracle = KernelOracle::new(p, GridSpec::new(1.0, 16, 1).unwrap(), 16).unwrap();
    let b: Vec<f64> = (0..reps).map(|s| oracle.path(RngSeed::with_stream(32, s)).terminal()).collect();
    let d = ks_two_sample(&a, &b);
    assert!(d < 0.08, "KS distance {d}");
}

#[test]
fn kernel_oracle_second_moment_at_128_cells() {
    let p = HermiteParams::new(0.7, 2).unwrap();
    let grid = GridSpec::new(1.0, 16, 1).unwrap();
    let req = HermitePathRequest::new(p, grid, 8, RngSeed::new(0));
    let oracle = KernelOracle::new(p, grid, 8).unwrap();
    assert_eq!(oracle.cells(), 128);
    let z: Vec<f64> = (0..10_000).map(|s| oracle.path(RngSeed::with_stream(41, s)).terminal()).collect();
    let m = second_moment(&z);
    assert!((m - 1.0).abs() < 0.1, "{m}");
    let single = kernel_oracle_path(&HermitePathRequest { seed: RngSeed::with_stream(41, 0), ..req }).unwrap();
    assert_eq!(single.terminal(), z[0]);
}

#[test]
fn kernel_projection_variance_grows_with_resolution() {
    let p = HermiteParams::new(0.7, 2).unwrap();
    let mut prev = 0.0;
    for m in [2usize, 4, 8, 16] {
        let o = KernelOracle::new(p, GridSpec::new(1.0, 16, 1).unwrap(), m).unwrap();
        let v = o.discretized_variance(16);
        assert!(v > prev && v < 1.0, "M = {m}: {v}");
        prev = v;
    }
    let p1 = HermiteParams::new(0.6, 1).unwrap();
    let o = KernelOracle::new(p1, GridSpec::new(1.0, 16, 1).unwrap(), 16).unwrap();
    assert!((o.discretized_variance(16) - 1.0).abs() < 1e-3);
}
