use hermite_qv::integrator::{dh_norm, holder_estimate};
use hermite_qv::stats::{mean, median, ols_slope, second_moment, variance};
use hermite_qv::{
    solve_sde, wiener_integral, Drift, GridSpec, HermiteGenerator, HermiteParams, IntensityFn, RngSeed,
    SdeSpec,
};

fn integrands() -> Vec<(&'static str, IntensityFn)> {
    vec![
        ("constant", IntensityFn::constant(1.5)),
        ("linear", IntensityFn::linear(0.0, 1.0, 1.0)),
        ("step", IntensityFn::step(vec![0.5], vec![1.0, 3.0]).unwrap()),
    ]
}

fn terminal_values(f: &IntensityFn, h: f64, n: usize, reps: u64, stream: u64) -> Vec<f64> {
    let gen = HermiteGenerator::new(HermiteParams::new(h, 1).unwrap(), GridSpec::new(1.0, n, 1).unwrap(), 1)
        .unwrap();
    (0..reps)
        .map(|s| wiener_integral(f, &gen.generate(RngSeed::with_stream(stream, s))).unwrap().path.terminal())
        .collect()
}

#[test]
fn isometry_for_linear_integrand() {
    let h = 0.7;
    let f = IntensityFn::linear(0.0, 1.0, 1.0);
    let x = terminal_values(&f, h, 1 << 12, 8000, 1);
    let mc = second_moment(&x);
    let exact = dh_norm(&f, &f, h, 1.0).unwrap();
    assert!((mc / exact - 1.0).abs() < 0.05, "{mc} vs {exact}");
}

#[test]
fn l_one_over_h_bound_constant_is_stable() {
    let h: f64 = 0.7;
    let p = 1.0 / h;
    let cs: Vec<f64> = integrands()
        .iter()
        .enumerate()
        .map(|(i, (_, f))| {
            let x = terminal_values(f, h, 1 << 10, 4000, 10 + i as u64);
            let lp = f.lp_pow(p, 0.0, 1.0).powf(h);
            second_moment(&x).sqrt() / lp
        })
        .collect();
    let c = mean(&cs);
    for v in &cs {
        assert!((v / c - 1.0).abs() < 0.2, "{cs:?}");
    }
}

#[test]
fn fbm_holder_exponent() {
    let gen = HermiteGenerator::new(HermiteParams::new(0.7, 1).unwrap(), GridSpec::new(1.0, 1 << 12, 1).unwrap(), 1)
        .unwrap();
    let est: Vec<f64> =
        (0..100).map(|s| holder_estimate(&gen.generate(RngSeed::with_stream(2, s))).unwrap()).collect();
    let m = median(&est);
    assert!(m > 0.6 && m < 0.7, "median Hölder estimate {m}");
}

#[test]
fn hermite_ou_variance_is_stable_under_refinement() {
    let p = HermiteParams::new(0.7, 2).unwrap();
    let fine = GridSpec::new(1.0, 1 << 13, 1).unwrap();
    let gen = HermiteGenerator::new(p, fine, 1).unwrap();
    let spec = SdeSpec::new(Drift::Linear { lambda: 1.0 }, IntensityFn::constant(1.0), 0.0);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for s in 0..2000 {
        let z = gen.generate(RngSeed::with_stream(3, s));
        a.push(solve_sde(&spec, &z.decimated(2).unwrap()).unwrap().terminal());
        b.push(solve_sde(&spec, &z).unwrap().terminal());
    }
    let (va, vb) = (variance(&a), variance(&b));
    assert!((va / vb - 1.0).abs() < 0.05, "{va} vs {vb}");
}

#[test]
fn euler_refinement_rate() {
    let p = HermiteParams::new(0.7, 1).unwrap();
    let finest = GridSpec::new(1.0, 1 << 14, 1).unwrap();
    let gen = HermiteGenerator::new(p, finest, 1).unwrap();
    let spec = SdeSpec::new(Drift::Cubic { a: 1.0 }, IntensityFn::constant(1.0), 0.5);
    let steps = [4usize, 8, 16, 32];
    let mut diffs = vec![0.0; steps.len()];
    let reps = 50;
    for s in 0..reps {
        let z = gen.generate(RngSeed::with_stream(4, s));
        for (d, &k) in diffs.iter_mut().zip(&steps) {
            let coarse = solve_sde(&spec, &z.decimated(k).unwrap()).unwrap().terminal();
            let finer = solve_sde(&spec, &z.decimated(k / 2).unwrap()).unwrap().terminal();
            *d += (coarse - finer).abs() / reps as f64;
        }
    }
    let lx: Vec<f64> = steps.iter().map(|&k| (k as f64 / finest.fine() as f64).ln()).collect();
    let ly: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
    let slope = ols_slope(&lx, &ly);
    assert!(slope >= 0.5, "slope {slope}");
}
