//! Run artifacts: JSON summaries, CSV series, atomic file writes, and
//! the registry of named verification checks the CLI exposes. Artifact
//! layouts are documented in `docs/schema.md`.
//!
//! Everything written here is deterministic for a fixed scenario and
//! seed: no timestamps, no map iteration order, stable float formatting
//! through `serde_json`.

use crate::config::Scenario;
use crate::error::Error;
use crate::fields::{SpaceTimeField, TimeGrid, TimeSeries};
use crate::fraccalc::{
    abel_invert, composition_constant, f_mu_transform, frac_integral, sample_lplus, FracOrder,
};
use crate::inequalities::{
    boundedness_harnesses, build_riccati_chain, chain_forcing_majorant, check_32_34,
    check_apriori, check_bilinear, check_key_inequality, default_chain_strength, HarnessConfig,
    HarnessReport, InequalityReport,
};
use crate::projection::weyl_decompose;
use crate::sampling::{random_series, random_vector_field};
use crate::solver::{solve_inhomogeneous, SolutionBundle, SolveConfig};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Deterministic summary of one solve, serialized to `summary.json`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub sign: String,
    pub mu: f64,
    pub cutoff: usize,
    pub grid: usize,
    pub steps: usize,
    pub horizon: f64,
    pub rho: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_update: f64,
    pub w_qt_norm: f64,
    pub f_qt_norm: f64,
    pub max_residual: f64,
    pub max_budget: f64,
}

impl RunSummary {
    pub fn new(scenario: &Scenario, cfg: &SolveConfig, bundle: &SolutionBundle) -> Self {
        Self {
            name: scenario.name.clone(),
            seed: scenario.seed,
            sign: match scenario.solve.sign {
                crate::solver::SignConvention::Standard => "standard".into(),
                crate::solver::SignConvention::Paper => "paper".into(),
            },
            mu: cfg.mu.mu(),
            cutoff: cfg.domain.cutoff(),
            grid: cfg.domain.grid(),
            steps: cfg.grid.steps(),
            horizon: cfg.grid.horizon(),
            rho: cfg.hp.rho(),
            tolerance: cfg.tolerance,
            converged: true,
            iterations: bundle.iterations,
            final_update: *bundle.update_norms.last().unwrap_or(&0.0),
            w_qt_norm: bundle.w_norm.l2_norm(),
            f_qt_norm: bundle.f_norm.l2_norm(),
            max_residual: bundle.residual.linf_norm(),
            max_budget: bundle.residual_budget.linf_norm(),
        }
    }
}

/// One row of a convergence study, serialized to `convergence.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub cutoff: usize,
    pub error: f64,
    /// `log2(e_prev / e_this)`; absent on the first row.
    pub order: Option<f64>,
}

/// Uniform JSON shape for every verification outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub pass: bool,
    pub constants: Vec<(String, f64)>,
    pub notes: String,
}

impl From<InequalityReport> for CheckOutcome {
    fn from(r: InequalityReport) -> Self {
        let mut constants = r.constants;
        constants.push(("min_margin".into(), r.min_margin));
        Self {
            id: r.id,
            pass: r.pass,
            constants,
            notes: r.notes,
        }
    }
}

impl From<HarnessReport> for CheckOutcome {
    fn from(r: HarnessReport) -> Self {
        Self {
            id: r.id,
            pass: r.stable,
            constants: vec![
                ("exponent".into(), r.exponent),
                ("constant".into(), r.constant),
                ("refined_constant".into(), r.refined_constant),
            ],
            notes: r.notes,
        }
    }
}

// ---------------------------------------------------------------------------
// Atomic artifact writers
// ---------------------------------------------------------------------------

/// Write bytes via a temp file in the same directory plus rename, so a
/// crash never leaves a truncated artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// `t,w,f,p,residual` per time node.
pub fn write_norm_csv(path: &Path, bundle: &SolutionBundle) -> Result<(), Error> {
    let grid = bundle.w_norm.grid();
    let mut out = String::from("t,w,f,p,residual\n");
    for i in 0..grid.num_nodes() {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            grid.time(i),
            bundle.w_norm.values()[i],
            bundle.f_norm.values()[i],
            bundle.p_norm.values()[i],
            bundle.residual.values()[i],
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// `t,lhs,rhs` of one inequality report.
pub fn write_report_csv(path: &Path, report: &InequalityReport) -> Result<(), Error> {
    let grid = report.lhs.grid();
    let mut out = String::from("t,lhs,rhs\n");
    for i in 0..grid.num_nodes() {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e}\n",
            grid.time(i),
            report.lhs.values()[i],
            report.rhs.values()[i],
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// `steps,cutoff,error,order` per refinement level.
pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<(), Error> {
    let mut out = String::from("steps,cutoff,error,order\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.17e},{}\n",
            r.steps,
            r.cutoff,
            r.error,
            r.order.map_or(String::new(), |o| format!("{o:.6}")),
        ));
    }
    write_atomic(path, out.as_bytes())
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

/// Refinement sweep over time resolutions for a manufactured scenario:
/// solves at each level with the exact initial data and reports the
/// `L2(Q_T)` velocity error and the observed order between consecutive
/// levels.
pub fn convergence_study(
    scenario: &Scenario,
    levels: &[usize],
) -> Result<Vec<ConvergenceRow>, Error> {
    if scenario.forcing.kind != "manufactured" {
        return Err(Error::Config(
            "convergence studies need a manufactured forcing".into(),
        ));
    }
    if levels.len() < 2 {
        return Err(Error::Config(
            "need at least two refinement levels".into(),
        ));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &steps in levels {
        let mut level = scenario.clone();
        level.solve.steps = steps;
        level.solve.block_steps = 0;
        let cfg = level.solve_config()?;
        let (f, u_star) = level.build_forcing(&cfg)?;
        let u_star = u_star.expect("manufactured forcing has an exact field");
        let a = u_star.snapshot(0).clone();
        let bundle = solve_inhomogeneous(&f, &a, &cfg)?;
        let error = bundle.u.sub(&u_star).l2_qt_norm();
        let order = rows
            .last()
            .map(|prev| (prev.error / error).log2() / (steps as f64 / prev.steps as f64).log2());
        rows.push(ConvergenceRow {
            steps,
            cutoff: cfg.domain.cutoff(),
            error,
            order,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Verification registry
// ---------------------------------------------------------------------------

/// Identifiers accepted in a scenario's verification set.
pub const KNOWN_CHECKS: [&str; 10] = [
    "abel-roundtrip",
    "composition",
    "f-mu-identity",
    "projection",
    "bilinear",
    "norm-inequalities",
    "riccati-chain",
    "apriori",
    "hopf",
    "harnesses",
];

/// Run one named check. Operator checks are self-contained; the
/// solution-level checks perform a fresh solve from the scenario's
/// forcing and initial data.
pub fn run_check(id: &str, scenario: &Scenario) -> Result<Vec<CheckOutcome>, Error> {
    match id {
        "abel-roundtrip" => check_abel_roundtrip(),
        "composition" => check_composition(),
        "f-mu-identity" => check_f_mu_identity(scenario.seed),
        "projection" => check_projection(scenario),
        "bilinear" => {
            let cfg = scenario.solve_config()?;
            let (f, _) = scenario.build_forcing(&cfg)?;
            Ok(vec![check_bilinear(&f, cfg.mu, cfg.hp)?.into()])
        }
        "norm-inequalities" => {
            let (bundle, cfg) = solve_scenario(scenario)?;
            let reports = check_32_34(&bundle.w_norm, &bundle.f_norm, &bundle.p_norm, cfg.mu)?;
            Ok(reports.into_iter().map(CheckOutcome::from).collect())
        }
        "riccati-chain" => {
            let (bundle, cfg) = solve_scenario(scenario)?;
            let k = default_chain_strength(1.0, cfg.mu)?;
            let m = chain_forcing_majorant(&bundle.w_norm, cfg.mu, 0.25);
            let mut chain = build_riccati_chain(&bundle.w_norm, &m, cfg.mu, k, 1.0)?;
            Ok(vec![check_key_inequality(&mut chain)?.into()])
        }
        "apriori" => {
            let (bundle, _) = solve_scenario(scenario)?;
            Ok(vec![check_apriori(&bundle).into()])
        }
        "hopf" => check_hopf(scenario),
        "harnesses" => {
            let cfg = HarnessConfig {
                seed: scenario.seed,
                ..HarnessConfig::default()
            };
            Ok(boundedness_harnesses(&cfg)?
                .into_iter()
                .map(CheckOutcome::from)
                .collect())
        }
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

/// Run the scenario's verification set (or an explicit list).
pub fn run_checks(scenario: &Scenario, ids: &[String]) -> Result<Vec<CheckOutcome>, Error> {
    let mut out = Vec::new();
    for id in ids {
        out.extend(run_check(id, scenario)?);
    }
    Ok(out)
}

fn solve_scenario(scenario: &Scenario) -> Result<(SolutionBundle, SolveConfig), Error> {
    let cfg = scenario.solve_config()?;
    let (f, _) = scenario.build_forcing(&cfg)?;
    let a = scenario.build_initial(&cfg)?;
    let bundle = solve_inhomogeneous(&f, &a, &cfg)?;
    Ok((bundle, cfg))
}

/// Fractional integration then inversion returns the input: `u` in
/// {1, t, sin 3t} at both tested orders, max node error below 1e-4.
fn check_abel_roundtrip() -> Result<Vec<CheckOutcome>, Error> {
    let grid = TimeGrid::new(1.0, 2048)?;
    let cases: [(&str, fn(f64) -> f64); 3] =
        [("1", |_| 1.0), ("t", |t| t), ("sin3t", |t| (3.0 * t).sin())];
    let mut worst = 0.0f64;
    for m in [0.625, 0.75] {
        let mu = FracOrder::new(m)?;
        for (_, f) in cases {
            let u = TimeSeries::from_fn(grid, f);
            let back = abel_invert(&frac_integral(&u, mu), mu)?;
            let err = back.zip_with(&u, |a, b| a - b).linf_norm();
            worst = worst.max(err);
        }
    }
    Ok(vec![CheckOutcome {
        id: "abel-roundtrip".into(),
        pass: worst < 1e-4,
        constants: vec![("max_error".into(), worst)],
        notes: "invert(integrate(u)) = u for u in {1, t, sin 3t}, orders 5/8 and 3/4".into(),
    }])
}

/// Nested fractional integrals against the Gamma-constant closed form.
fn check_composition() -> Result<Vec<CheckOutcome>, Error> {
    let grid = TimeGrid::new(1.0, 1024)?;
    let one = TimeSeries::from_fn(grid, |_| 1.0);
    let mut outcomes = Vec::new();
    for (m1, m2) in [(0.5, 0.5), (0.6, 0.3)] {
        let nested = frac_integral(&frac_integral(&one, FracOrder::new(m2)?), FracOrder::new(m1)?);
        let c = composition_constant(m1, m2);
        let power = 2.0 - m1 - m2;
        let exact = TimeSeries::from_fn(grid, |t| c.value * t.powf(power) / power);
        // error relative to the scale of the exact profile; pointwise
        // ratios at t -> 0 only measure the self-similar quadrature
        // startup where both sides vanish
        let rel = nested.zip_with(&exact, |a, b| a - b).linf_norm() / exact.linf_norm();
        outcomes.push(CheckOutcome {
            id: format!("composition ({m1},{m2})"),
            pass: rel < 1e-3,
            constants: vec![("gamma_constant".into(), c.value), ("max_rel_error".into(), rel)],
            notes: "J^m1 J^m2 1 against the Gamma-constant closed form".into(),
        });
    }
    Ok(outcomes)
}

/// Transform identity on the representable class: for `fsq` built from
/// `g`, the normalized transform is twice the running integral of `g^2`
/// and is nondecreasing.
fn check_f_mu_identity(seed: u64) -> Result<Vec<CheckOutcome>, Error> {
    let grid = TimeGrid::new(1.0, 1024)?;
    let mu = FracOrder::new(0.625)?;
    let mut worst = 0.0f64;
    let mut monotone = true;
    for i in 0..20u64 {
        let g = random_series(grid, seed.wrapping_add(i)).map(f64::abs);
        let fsq = sample_lplus(&g, mu)?;
        let f = f_mu_transform(&fsq, mu)?;
        let target = g.map(|v| v * v).cumulative_trapz().map(|v| 2.0 * v);
        let scale = target.linf_norm().max(1e-300);
        worst = worst.max(f.zip_with(&target, |a, b| a - b).linf_norm() / scale);
        monotone &= f.values().windows(2).all(|w| w[1] >= w[0]);
    }
    Ok(vec![CheckOutcome {
        id: "f-mu-identity".into(),
        pass: worst < 1e-3 && monotone,
        constants: vec![
            ("max_rel_error".into(), worst),
            ("monotone".into(), if monotone { 1.0 } else { 0.0 }),
        ],
        notes: "transform of a representable rhs equals 2 int g^2 and is nondecreasing".into(),
    }])
}

/// Decomposition exactness: the solenoidal part is divergence-free to
/// coefficient roundoff and the gradient part never exceeds the input
/// (fitted constant at most 3, theoretically 1).
fn check_projection(scenario: &Scenario) -> Result<Vec<CheckOutcome>, Error> {
    let domain = scenario.domain()?;
    let mut max_div = 0.0f64;
    let mut c = 0.0f64;
    for i in 0..100u64 {
        let v = random_vector_field(domain, scenario.seed.wrapping_add(5000 + i));
        let d = weyl_decompose(&v);
        max_div = max_div.max(crate::fields::divergence(&d.solenoidal).max_coeff_norm());
        let denom = v.scalar_norm();
        if denom > 1e-12 {
            c = c.max(d.gradient_part.scalar_norm() / denom);
        }
    }
    Ok(vec![CheckOutcome {
        id: "projection".into(),
        pass: max_div < 1e-13 && c <= 3.0,
        constants: vec![("max_divergence".into(), max_div), ("c".into(), c)],
        notes: "100 random fields: solenoidal part divergence-free, gradient part bounded".into(),
    }])
}

/// Energy inequality of the recovered flow: for every node,
///
/// ```text
/// 1/2 ||u(t)||^2 + rho int_0^t ||grad u||^2  <=  c ( 1/2 ||a||^2 + int_0^t (f, u) )
/// ```
///
/// with the fitted `c` close to 1 (the continuum identity is an
/// equality for smooth flows).
fn check_hopf(scenario: &Scenario) -> Result<Vec<CheckOutcome>, Error> {
    let (bundle, cfg) = solve_scenario(scenario)?;
    let (f, _) = scenario.build_forcing(&cfg)?;
    let grid = cfg.grid;
    let energy = |u: &SpaceTimeField, i: usize| -> f64 {
        (0..3).map(|ci| u.snapshot(i).component(ci).l2_norm().powi(2)).sum()
    };
    let grad_sq = TimeSeries::new(
        grid,
        (0..grid.num_nodes())
            .map(|i| {
                let s = bundle.u.snapshot(i);
                (0..3)
                    .flat_map(|ci| (0..3).map(move |a| (ci, a)))
                    .map(|(ci, a)| s.component(ci).derivative(a).l2_norm().powi(2))
                    .sum()
            })
            .collect(),
    )?;
    let work = TimeSeries::new(
        grid,
        (0..grid.num_nodes())
            .map(|i| f.snapshot(i).l2_inner(bundle.u.snapshot(i)))
            .collect(),
    )?;
    let half_a = 0.5 * energy(&bundle.u, 0);
    let dissipation = grad_sq.cumulative_trapz();
    let lhs = TimeSeries::new(
        grid,
        (0..grid.num_nodes())
            .map(|i| 0.5 * energy(&bundle.u, i) + cfg.hp.rho() * dissipation.values()[i])
            .collect(),
    )?;
    let rhs = work.cumulative_trapz().map(|v| half_a + v);
    let scale = lhs.linf_norm().max(rhs.linf_norm());
    let mut c = 0.0f64;
    let mut pass = true;
    for i in 0..grid.num_nodes() {
        let (l, r) = (lhs.values()[i], rhs.values()[i]);
        // fit only where the budget side carries real signal: early
        // nodes have both sides at quadrature-noise level
        if r > 0.05 * scale.max(1e-300) {
            c = c.max(l / r);
        } else if l > 0.2 * scale {
            pass = false;
        }
    }
    // discrete quadrature leaves O(h^2) slack around the continuum
    // identity, so the fitted constant must sit near 1
    pass = pass && c <= 1.1;
    Ok(vec![CheckOutcome {
        id: "hopf".into(),
        pass,
        constants: vec![("c".into(), c)],
        notes: "energy of the recovered flow vs initial energy plus work done".into(),
    }])
}
