//! End-to-end acceptance gate: eleven numbered criteria, one test (and
//! one printed PASS line) each. Run with `--nocapture` to see the
//! detail lines; the test names themselves carry the verdicts.

use nsvolterra::config::Scenario;
use nsvolterra::fields::{
    divergence, mixed_norm, DomainSpec, SpaceTimeField, SpectralVectorField, TimeGrid, TimeSeries,
};
use nsvolterra::fraccalc::{
    abel_invert, composition_constant, f_mu_transform, frac_integral, sample_lplus, FracOrder,
};
use nsvolterra::greenop::{grad_green, heat_flow, heat_solve, HeatParams};
use nsvolterra::inequalities::{
    boundedness_harnesses, build_riccati_chain, chain_forcing_majorant, check_apriori,
    check_key_inequality, default_chain_strength, HarnessConfig,
};
use nsvolterra::projection::weyl_decompose;
use nsvolterra::report::{run_check, RunSummary};
use nsvolterra::sampling::{random_divfree_field, random_space_time_field, random_series, random_vector_field};
use nsvolterra::solver::{
    manufactured_forcing, picard_solve, solve_inhomogeneous, ManufacturedSpec, SignConvention,
    SolutionBundle, SolveConfig,
};
use std::time::Instant;

fn mu(m: f64) -> FracOrder {
    FracOrder::new(m).unwrap()
}

fn base_config(n: usize, steps: usize, sign: SignConvention) -> SolveConfig {
    let mut cfg = SolveConfig::basic(
        DomainSpec::cube_2pi(n),
        TimeGrid::new(1.0, steps).unwrap(),
        HeatParams::new(1.0).unwrap(),
    );
    cfg.sign = sign;
    cfg
}

/// Stationary random divergence-free shape with exponential decay.
fn random_forcing(cfg: &SolveConfig, seed: u64, eps: f64) -> SpaceTimeField {
    let shape = random_divfree_field(cfg.domain, seed).scaled(eps);
    SpaceTimeField::from_fn(cfg.domain, cfg.grid, |_, t| shape.scaled((-t).exp()))
}

/// The shared battery of converged solves used by criteria 7 and 9:
/// random small data at both sign conventions, a manufactured flow, and
/// a single-mode forcing.
fn battery() -> Vec<(SolutionBundle, SolveConfig)> {
    let mut out = Vec::new();
    for (seed, eps, sign) in [
        (1u64, 0.05, SignConvention::Standard),
        (2, 0.1, SignConvention::Standard),
        (3, 0.05, SignConvention::Paper),
    ] {
        let cfg = base_config(3, 32, sign);
        let f = random_forcing(&cfg, seed, eps);
        out.push((picard_solve(&f, &cfg).unwrap(), cfg));
    }
    {
        let cfg = base_config(2, 32, SignConvention::Standard);
        let spec = ManufacturedSpec {
            family: "decaying-swirl".into(),
            epsilon: 0.1,
            lambda: 2.0,
        };
        let (f, u_star, _) = manufactured_forcing(&spec, &cfg).unwrap();
        let bundle = solve_inhomogeneous(&f, u_star.snapshot(0), &cfg).unwrap();
        out.push((bundle, cfg));
    }
    {
        let cfg = base_config(3, 32, SignConvention::Standard);
        let sc = Scenario::parse(
            r#"
            name = "mode"
            [solve]
            cutoff = 3
            horizon = 1.0
            steps = 32
            rho = 1.0
            [forcing]
            kind = "single-mode"
            axis = 0
            frequency = 2
            amplitude = 0.1
            decay = 1.0
        "#,
        )
        .unwrap();
        let f = sc.build_forcing(&cfg).unwrap().0;
        out.push((picard_solve(&f, &cfg).unwrap(), cfg));
    }
    out
}

#[test]
fn criterion_01_abel_roundtrip() {
    let start = Instant::now();
    let grid = TimeGrid::new(1.0, 2048).unwrap();
    let cases: [(&str, fn(f64) -> f64); 3] =
        [("1", |_| 1.0), ("t", |t| t), ("sin3t", |t| (3.0 * t).sin())];
    let mut worst = 0.0f64;
    for m in [0.625, 0.75] {
        for (name, f) in cases {
            let u = TimeSeries::from_fn(grid, f);
            let back = abel_invert(&frac_integral(&u, mu(m)), mu(m)).unwrap();
            let err = back.zip_with(&u, |a, b| a - b).linf_norm();
            assert!(err < 1e-4, "u = {name}, mu = {m}: max error {err}");
            worst = worst.max(err);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 1 (integrate-invert roundtrip): PASS - max error {worst:.3e} in {elapsed:?}");
}

#[test]
fn criterion_02_composition_identity() {
    let grid = TimeGrid::new(1.0, 1024).unwrap();
    let one = TimeSeries::from_fn(grid, |_| 1.0);
    let mut details = Vec::new();
    for (m1, m2) in [(0.5, 0.5), (0.6, 0.3)] {
        let nested = frac_integral(&frac_integral(&one, mu(m2)), mu(m1));
        let c = composition_constant(m1, m2);
        let power = 2.0 - m1 - m2;
        let exact = TimeSeries::from_fn(grid, |t| c.value * t.powf(power) / power);
        let sup_rel = nested.zip_with(&exact, |a, b| a - b).linf_norm() / exact.linf_norm();
        let endpoint_rel = (nested.values().last().unwrap() - exact.values().last().unwrap())
            .abs()
            / exact.values().last().unwrap();
        assert!(sup_rel < 1e-3, "({m1},{m2}): sup relative error {sup_rel}");
        assert!(endpoint_rel < 1e-3, "({m1},{m2}): endpoint error {endpoint_rel}");
        details.push(format!("({m1},{m2}) err {sup_rel:.2e}"));
    }
    // (0.5, 0.5) constant is pi
    assert!((composition_constant(0.5, 0.5).value - std::f64::consts::PI).abs() < 1e-12);
    println!("criterion 2 (composition identity): PASS - {}", details.join(", "));
}

#[test]
fn criterion_03_transform_identity() {
    let grid = TimeGrid::new(1.0, 1024).unwrap();
    let m = mu(0.625);
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let g = random_series(grid, seed).map(f64::abs);
        let fsq = sample_lplus(&g, m).unwrap();
        let f = f_mu_transform(&fsq, m).unwrap();
        let target = g.map(|v| v * v).cumulative_trapz().map(|v| 2.0 * v);
        let rel = f.zip_with(&target, |a, b| a - b).linf_norm() / target.linf_norm();
        assert!(rel < 1e-3, "seed {seed}: relative error {rel}");
        let violations = f.values().windows(2).filter(|w| w[1] < w[0]).count();
        assert_eq!(violations, 0, "seed {seed}: transform not nondecreasing");
        worst = worst.max(rel);
    }
    println!("criterion 3 (transform identity, 20 seeds): PASS - max relative error {worst:.3e}");
}

#[test]
fn criterion_04_projection_exactness() {
    let domain = DomainSpec::cube_2pi(8);
    let mut max_div = 0.0f64;
    let mut c = 0.0f64;
    for seed in 0..100u64 {
        let v = random_vector_field(domain, 900 + seed);
        let d = weyl_decompose(&v);
        // the solenoidal part plus the gradient part restores v, and
        // the solenoidal part carries no divergence
        max_div = max_div.max(divergence(&d.solenoidal).max_coeff_norm());
        let denom = v.scalar_norm();
        if denom > 0.0 {
            c = c.max(d.gradient_part.scalar_norm() / denom);
        }
    }
    assert!(max_div < 1e-13, "max divergence coefficient {max_div}");
    assert!(c <= 3.0, "fitted projection constant {c}");
    println!("criterion 4 (projection exactness, 100 seeds): PASS - div {max_div:.2e}, c {c:.3}");
}

#[test]
fn criterion_05_heat_operator() {
    let domain = DomainSpec::cube_2pi(3);
    let hp = HeatParams::new(1.0).unwrap();

    // semigroup: marching the flow from an intermediate state lands on
    // the same nodes (exact per-mode exponentials)
    let a = random_divfree_field(domain, 77);
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let u = heat_flow(&a, hp, grid);
    let half = TimeGrid::new(0.5, 4).unwrap();
    let v = heat_flow(u.snapshot(4), hp, half);
    let semi_err = v.snapshot(4).sub(u.snapshot(8)).max_coeff_norm();
    assert!(semi_err < 1e-14, "semigroup defect {semi_err}");

    // discrete PDE residual of the forced solve is second order: the
    // sup residual drops by >= 3.5 per step doubling
    let residual = |steps: usize| -> f64 {
        let grid = TimeGrid::new(0.5, steps).unwrap();
        let f = random_space_time_field(domain, grid, 5);
        let u = heat_solve(&f, hp);
        let h = grid.h();
        let mut worst = 0.0f64;
        for n in 1..grid.num_nodes() - 1 {
            let ut = u.snapshot(n + 1).sub(u.snapshot(n - 1)).scaled(0.5 / h);
            let lap = u.snapshot(n).map(|c| c.laplacian());
            let r = ut.sub(&lap).sub(f.snapshot(n));
            worst = worst.max(r.max_coeff_norm());
        }
        worst
    };
    let ratio = residual(64) / residual(128);
    assert!(ratio >= 3.5, "residual ratio per doubling {ratio}");

    // mixed-norm operator constants stable within 20% under time
    // refinement
    let constants = |steps: usize| -> (f64, f64) {
        let grid = TimeGrid::new(1.0, steps).unwrap();
        let (mut cv, mut cg) = (0.0f64, 0.0f64);
        for seed in 0..5u64 {
            let g = random_space_time_field(domain, grid, 40 + seed);
            let denom = g.l2_qt_norm();
            cv = cv.max(mixed_norm(&heat_solve(&g, hp), 12.0, 8.0) / denom);
            let grad: f64 = (0..3)
                .map(|axis| mixed_norm(&grad_green(&g, hp, axis), 12.0 / 5.0, 8.0))
                .sum();
            cg = cg.max(grad / denom);
        }
        (cv, cg)
    };
    let (cv1, cg1) = constants(16);
    let (cv2, cg2) = constants(32);
    assert!((cv2 / cv1 - 1.0).abs() <= 0.2, "value constant drifted: {cv1} -> {cv2}");
    assert!((cg2 / cg1 - 1.0).abs() <= 0.2, "gradient constant drifted: {cg1} -> {cg2}");
    println!(
        "criterion 5 (heat operator): PASS - semigroup {semi_err:.1e}, residual ratio {ratio:.2}, \
         constants {cv2:.3}/{cg2:.3}"
    );
}

#[test]
fn criterion_06_manufactured_convergence() {
    let errors = |lambda: f64, cutoff: usize| -> Vec<f64> {
        [32usize, 64, 128]
            .iter()
            .map(|&steps| {
                let cfg = base_config(cutoff, steps, SignConvention::Standard);
                let spec = ManufacturedSpec {
                    family: "decaying-swirl".into(),
                    epsilon: 0.1,
                    lambda,
                };
                let (f, u_star, _) = manufactured_forcing(&spec, &cfg).unwrap();
                let bundle = solve_inhomogeneous(&f, u_star.snapshot(0), &cfg).unwrap();
                bundle.u.sub(&u_star).l2_qt_norm()
            })
            .collect()
    };

    // the stated family (decay 1 = viscosity * |k|^2) is reproduced by
    // the exponential integrator exactly, so its error sits at the
    // roundoff floor at every resolution - stronger than any finite
    // order. The genuine temporal order is exhibited on the same family
    // with decay 2, where the Duhamel correction is active.
    let start = Instant::now();
    let e1 = errors(1.0, 8);
    let elapsed = start.elapsed();
    let floor = e1.iter().all(|&e| e < 1e-12);
    let monotone = e1.windows(2).all(|w| w[1] < w[0]);
    let order1 = (e1[0] / e1[2]).log2() / 2.0;
    assert!(
        floor || (monotone && order1 >= 1.8),
        "decay-1 errors {e1:?} neither at the roundoff floor nor of order >= 1.8"
    );
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");

    // the family only excites |k| <= 1, so the temporal-order demo does
    // not need the large cutoff
    let e2 = errors(2.0, 2);
    assert!(e2.windows(2).all(|w| w[1] < w[0]), "errors not monotone: {e2:?}");
    let order2 = (e2[0] / e2[2]).log2() / 2.0;
    assert!(order2 >= 1.8, "observed order {order2} from {e2:?}");
    println!(
        "criterion 6 (manufactured convergence): PASS - decay-1 errors at {:.1e} (roundoff floor: {floor}), \
         decay-2 order {order2:.2} in {elapsed:?}",
        e1[2]
    );
}

#[test]
fn criterion_07_residual_within_budget() {
    let mut worst = 0.0f64;
    for (i, (bundle, _)) in battery().iter().enumerate() {
        for (n, (&r, &b)) in bundle
            .residual
            .values()
            .iter()
            .zip(bundle.residual_budget.values())
            .enumerate()
        {
            assert!(r <= 3.0 * b, "bundle {i}, node {n}: residual {r} vs budget {b}");
            if b > 0.0 {
                worst = worst.max(r / b);
            }
        }
    }
    println!("criterion 7 (residual within budget): PASS - worst residual/budget {worst:.3}");
}

#[test]
fn criterion_08_apriori_battery() {
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let cfg = base_config(8, 64, SignConvention::Standard);
        let eps = 0.05 + 0.05 * (seed % 2) as f64;
        let f = random_forcing(&cfg, 100 + seed, eps);
        let bundle = picard_solve(&f, &cfg).unwrap();
        let report = check_apriori(&bundle);
        let ratio = report.constants[0].1;
        assert!(report.pass && ratio < sqrt2, "seed {seed}: ratio {ratio}");
        worst = worst.max(ratio);
    }
    // sweep the amplitude upward until the iteration stops converging
    // and record the largest converged ratio (reported, not asserted)
    let mut eps = 0.2;
    let mut largest = worst;
    let mut limit = None;
    for _ in 0..12 {
        let cfg = base_config(4, 32, SignConvention::Standard);
        let f = random_forcing(&cfg, 100, eps);
        match picard_solve(&f, &cfg) {
            Ok(bundle) => {
                largest = largest.max(check_apriori(&bundle).constants[0].1);
                eps *= 2.0;
            }
            Err(_) => {
                limit = Some(eps);
                break;
            }
        }
    }
    println!(
        "criterion 8 (a priori battery, 20 seeds): PASS - worst small-data ratio {worst:.4}, \
         largest converged ratio {largest:.4}, first non-converged amplitude {limit:?}"
    );
}

#[test]
fn criterion_09_riccati_chain() {
    let m = mu(0.625);
    let k = default_chain_strength(1.0, m).unwrap();
    let mut worst_residual = 0.0f64;
    for (i, (bundle, cfg)) in battery().iter().enumerate() {
        let majorant = chain_forcing_majorant(&bundle.w_norm, m, 0.25);
        let mut chain = build_riccati_chain(&bundle.w_norm, &majorant, m, k, 1.0).unwrap();
        // z nonincreasing is asserted inside the builder
        let report = check_key_inequality(&mut chain).unwrap();
        assert!(report.pass, "bundle {i}: margin {}", report.min_margin);
        let half = cfg.grid.horizon() / 2.0;
        let (t1, t2) = (chain.t1.unwrap(), chain.t2.unwrap());
        assert!(0.0 < t1 && t1 < half && half < t2 && t2 < 2.0 * half, "bundle {i}: {t1}, {t2}");
        let res = report
            .constants
            .iter()
            .find(|(n, _)| n == "bisect_residual")
            .unwrap()
            .1;
        assert!(res < 1e-10, "bundle {i}: bisection residual {res}");
        worst_residual = worst_residual.max(res);
    }
    // forward slope of z at the origin tends to zero under refinement,
    // like h^(1-mu). The data is small enough that the first-cell
    // Riccati exponent stays well below one; otherwise 1 - exp(-w2)
    // saturates and masks the rate until very fine grids.
    let slope = |steps: usize| -> f64 {
        let cfg = base_config(3, steps, SignConvention::Standard);
        let f = random_forcing(&cfg, 1, 0.005);
        let bundle = picard_solve(&f, &cfg).unwrap();
        let majorant = chain_forcing_majorant(&bundle.w_norm, m, 0.25);
        let chain = build_riccati_chain(&bundle.w_norm, &majorant, m, k, 1.0).unwrap();
        (chain.z.values()[1] - chain.z.values()[0]).abs() / cfg.grid.h()
    };
    let slopes = [slope(16), slope(64), slope(256)];
    assert!(
        slopes[1] < 0.7 * slopes[0] && slopes[2] < 0.7 * slopes[1],
        "origin slopes not vanishing: {slopes:?}"
    );
    println!(
        "criterion 9 (chain on battery): PASS - worst bisection residual {worst_residual:.2e}, \
         origin slopes {slopes:?}"
    );
}

#[test]
fn criterion_10_operator_norm_harnesses() {
    let cfg = HarnessConfig {
        hl_samples: 500,
        sobolev_samples: 500,
        ..HarnessConfig::default()
    };
    let reports = boundedness_harnesses(&cfg).unwrap();
    let hl = &reports[0];
    assert_eq!(hl.exponent, 8.0, "p = 2, mu = 5/8 must map into L8");
    let potential = reports
        .iter()
        .find(|r| r.id.starts_with("potential"))
        .unwrap();
    assert_eq!(potential.exponent, 12.0);
    for r in &reports {
        assert!(r.constant.is_finite() && r.constant > 0.0, "{}: {}", r.id, r.constant);
        assert!(
            r.stable,
            "{}: constant {} moved to {} under refinement",
            r.id, r.constant, r.refined_constant
        );
    }
    println!(
        "criterion 10 (operator-norm harnesses, 500 samples): PASS - J^mu constant {:.3}, \
         potential constant {:.3}",
        hl.constant, potential.constant
    );
}

#[test]
fn criterion_11_inhomogeneous_reduction() {
    // zero initial data must reduce to the homogeneous solver exactly,
    // including the serialized summary
    let sc = Scenario::parse(
        r#"
        name = "reduction"
        seed = 5
        [solve]
        cutoff = 3
        horizon = 1.0
        steps = 16
        rho = 1.0
        [forcing]
        kind = "random"
        epsilon = 0.05
        decay = 1.0
    "#,
    )
    .unwrap();
    let cfg = sc.solve_config().unwrap();
    let (f, _) = sc.build_forcing(&cfg).unwrap();
    let b_hom = picard_solve(&f, &cfg).unwrap();
    let b_inhom = solve_inhomogeneous(&f, &SpectralVectorField::zero(cfg.domain), &cfg).unwrap();
    let s_hom = serde_json::to_string(&RunSummary::new(&sc, &cfg, &b_hom)).unwrap();
    let s_inhom = serde_json::to_string(&RunSummary::new(&sc, &cfg, &b_inhom)).unwrap();
    assert_eq!(s_hom, s_inhom, "summaries differ for a = 0");
    assert_eq!(b_hom.update_norms, b_inhom.update_norms);

    // with small divergence-free initial data the energy inequality of
    // the recovered flow holds with a fitted constant near one
    let sc = Scenario::parse(
        r#"
        name = "hopf"
        seed = 5
        [solve]
        cutoff = 2
        horizon = 1.0
        steps = 16
        rho = 1.0
        [forcing]
        kind = "manufactured"
        epsilon = 0.05
        lambda = 2.0
        [initial]
        kind = "manufactured"
    "#,
    )
    .unwrap();
    let outcomes = run_check("hopf", &sc).unwrap();
    assert!(outcomes[0].pass, "{:?}", outcomes[0]);
    let c = outcomes[0].constants[0].1;
    println!(
        "criterion 11 (inhomogeneous reduction): PASS - summaries identical, energy constant {c:.4}"
    );
}
