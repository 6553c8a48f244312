//! The nonlinear Volterra fixed-point solve.
//!
//! The momentum equation is reformulated through the auxiliary field
//! `w = u_t - rho*Lap(u) - grad p`: the velocity is recovered as
//! `u = G(Leray w)` (heat Green operator applied to the projected
//! field), and `w` itself satisfies `w = f -/+ K(w)` where `K` is the
//! convection of the recovered velocity. The fixed point is solved by
//! damped Picard iteration marching causally over time blocks; initial
//! data enters through the heat semigroup and two extra linearized
//! convection terms.

use crate::error::Error;
use crate::fields::{
    divergence, gradient, DomainSpec, SpaceTimeField, SpectralField, SpectralVectorField,
    TimeGrid, TimeSeries,
};
use crate::fraccalc::FracOrder;
use crate::greenop::{heat_flow, heat_solve, HeatParams};
use crate::projection::{leray_project, pressure_potential};
use serde::{Deserialize, Serialize};

/// Which sign the convection term carries.
///
/// `Standard` is the physical form `u_t - rho*Lap(u) + (u.grad)u +
/// grad p = f`; `Paper` flips the convection sign, reproducing the
/// momentum equation with `-(u.grad)u` that some derivations of this
/// reformulation carry. The two differ only in where the nonlinearity
/// is added in the fixed point and in the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    Standard,
    Paper,
}

impl SignConvention {
    /// Multiplier of the convection term in the momentum equation.
    fn factor(&self) -> f64 {
        match self {
            SignConvention::Standard => 1.0,
            SignConvention::Paper => -1.0,
        }
    }
}

/// Everything the fixed-point solve needs to know.
#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub domain: DomainSpec,
    pub grid: TimeGrid,
    pub hp: HeatParams,
    /// Relative L2(Q_T) update norm below which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial under-relaxation factor in (0, 1]; auto-halved (floor
    /// 1/16) whenever the update norm grows.
    pub relaxation: f64,
    pub sign: SignConvention,
    /// Diagnostic fractional order carried into the inequality chain.
    pub mu: FracOrder,
    /// Causal marching block length in time steps; must divide the
    /// step count.
    pub block_steps: usize,
}

impl SolveConfig {
    pub fn new(
        domain: DomainSpec,
        grid: TimeGrid,
        hp: HeatParams,
        tolerance: f64,
        max_iterations: usize,
        relaxation: f64,
        sign: SignConvention,
        mu: FracOrder,
        block_steps: usize,
    ) -> Result<Self, Error> {
        if !(tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if !(relaxation > 0.0 && relaxation <= 1.0) {
            return Err(Error::Config("relaxation must lie in (0, 1]".into()));
        }
        if max_iterations == 0 {
            return Err(Error::Config("need at least one iteration".into()));
        }
        if block_steps == 0 || grid.steps() % block_steps != 0 {
            return Err(Error::Config(format!(
                "block length {block_steps} must divide the step count {}",
                grid.steps()
            )));
        }
        Ok(Self {
            domain,
            grid,
            hp,
            tolerance,
            max_iterations,
            relaxation,
            sign,
            mu,
            block_steps,
        })
    }

    /// Sensible defaults: tolerance 1e-10, 60 iterations, no initial
    /// damping, standard signs, mu = 5/8, a single time block.
    pub fn basic(domain: DomainSpec, grid: TimeGrid, hp: HeatParams) -> Self {
        Self::new(
            domain,
            grid,
            hp,
            1e-10,
            60,
            1.0,
            SignConvention::Standard,
            FracOrder::new(0.625).expect("5/8 is admissible"),
            grid.steps(),
        )
        .expect("defaults are valid")
    }
}

/// Converged solve output.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    /// The auxiliary field solving the fixed point.
    pub w: SpaceTimeField,
    /// Recovered velocity; divergence-free, equals the prescribed
    /// initial data at t = 0.
    pub u: SpaceTimeField,
    /// Physical pressure gradient per node.
    pub grad_p: SpaceTimeField,
    /// Zero-mean physical pressure per node.
    pub p: Vec<SpectralField>,
    pub iterations: usize,
    /// Relative update norm of every Picard sweep, in order.
    pub update_norms: Vec<f64>,
    /// Component-summed L2(Omega) norm series of w, f, and the L2 norm
    /// of p.
    pub w_norm: TimeSeries,
    pub f_norm: TimeSeries,
    pub p_norm: TimeSeries,
    /// Strong-form momentum residual per node.
    pub residual: TimeSeries,
    /// Discretization error budget the residual is expected to respect.
    pub residual_budget: TimeSeries,
}

/// Convection `(u . grad) u`, dealiased, per time node: component `i` is
/// `sum_j u_j * d u_i / d x_j`.
pub fn nonlinear_term(u: &SpaceTimeField) -> SpaceTimeField {
    u.map_snapshots(convection_snapshot)
}

fn convection_snapshot(u: &SpectralVectorField) -> SpectralVectorField {
    let domain = u.domain();
    let mut out = SpectralVectorField::zero(domain);
    for i in 0..3 {
        let mut acc = SpectralField::zero(domain);
        for j in 0..3 {
            let term = u
                .component(j)
                .pointwise_product(&u.component(i).derivative(j))
                .expect("components share a domain");
            acc = acc.add(&term);
        }
        *out.component_mut(i) = acc;
    }
    out
}

/// Velocity recovery `u = G(Leray w)`: the pressure-gradient correction
/// makes the Duhamel forcing divergence-free, so `div u = 0` at every
/// node and `u(., 0) = 0`.
pub fn recover_velocity(w: &SpaceTimeField, cfg: &SolveConfig) -> SpaceTimeField {
    heat_solve(&w.map_snapshots(leray_project), cfg.hp)
}

/// The nonlinear Volterra operator: convection of the recovered
/// velocity.
pub fn apply_kp(w: &SpaceTimeField, cfg: &SolveConfig) -> SpaceTimeField {
    nonlinear_term(&recover_velocity(w, cfg))
}

/// Solve `w = f -/+ K(w)` with zero initial velocity.
pub fn picard_solve(f: &SpaceTimeField, cfg: &SolveConfig) -> Result<SolutionBundle, Error> {
    let u0 = SpaceTimeField::zero(f.domain(), f.grid());
    solve_fixed_point(f, &u0, cfg)
}

/// Solve with divergence-free initial velocity `a`: the flow is split as
/// `u = v + u0` with `u0` the heat semigroup of `a`; `v` carries the
/// same fixed point plus the linearized cross-convection terms
/// `(u0.grad)v + (v.grad)u0`, and the forcing absorbs `(u0.grad)u0`.
pub fn solve_inhomogeneous(
    f: &SpaceTimeField,
    a: &SpectralVectorField,
    cfg: &SolveConfig,
) -> Result<SolutionBundle, Error> {
    let div_max = divergence(a).max_coeff_norm();
    if div_max > 1e-10 * a.max_coeff_norm().max(1.0) {
        return Err(Error::NotDivergenceFree(div_max));
    }
    let u0 = heat_flow(a, cfg.hp, cfg.grid);
    solve_fixed_point(f, &u0, cfg)
}

/// Cross-convection of the background flow with the perturbation:
/// component `i` is `sum_j (u0_j d v_i/d x_j + v_j d u0_i/d x_j)`.
fn cross_convection(u0: &SpectralVectorField, v: &SpectralVectorField) -> SpectralVectorField {
    let domain = u0.domain();
    let mut out = SpectralVectorField::zero(domain);
    for i in 0..3 {
        let mut acc = SpectralField::zero(domain);
        for j in 0..3 {
            let a = u0
                .component(j)
                .pointwise_product(&v.component(i).derivative(j))
                .expect("shared domain");
            let b = v
                .component(j)
                .pointwise_product(&u0.component(i).derivative(j))
                .expect("shared domain");
            acc = acc.add(&a).add(&b);
        }
        *out.component_mut(i) = acc;
    }
    out
}

fn solve_fixed_point(
    f: &SpaceTimeField,
    u0: &SpaceTimeField,
    cfg: &SolveConfig,
) -> Result<SolutionBundle, Error> {
    assert_eq!(f.grid(), cfg.grid, "forcing grid must match the config");
    if !f.is_finite() {
        return Err(Error::NonFinite(0));
    }
    let s = cfg.sign.factor();
    let background_is_zero = u0.snapshots().iter().all(|v| v.max_coeff_norm() == 0.0);

    // effective forcing: the background's own convection moves to the
    // right-hand side
    let f_base = if background_is_zero {
        f.clone()
    } else {
        f.sub(&nonlinear_term(u0).scaled(s))
    };

    // right-hand side of the fixed point for the current iterate
    let rhs = |w: &SpaceTimeField, cfg: &SolveConfig| -> SpaceTimeField {
        let v = recover_velocity(w, cfg);
        let mut k = nonlinear_term(&v);
        if !background_is_zero {
            let cross = SpaceTimeField::new(
                cfg.grid,
                u0.snapshots()
                    .iter()
                    .zip(v.snapshots())
                    .map(|(b, vv)| cross_convection(b, vv))
                    .collect(),
            );
            k = k.add(&cross);
        }
        f_base.sub(&k.scaled(s))
    };

    let nn = cfg.grid.num_nodes();
    let blocks = cfg.grid.steps() / cfg.block_steps;
    let mut w = f_base.clone();
    let mut theta = cfg.relaxation;
    let mut update_norms = Vec::new();
    let mut iterations = 0usize;

    let block_update_norm = |a: &SpaceTimeField, b: &SpaceTimeField, lo: usize, hi: usize| {
        let mut sq = 0.0;
        for n in lo..hi {
            let d = a.snapshot(n).sub(b.snapshot(n));
            let norm = d.scalar_norm();
            sq += norm * norm;
        }
        (sq * cfg.grid.h()).sqrt()
    };

    for block in 0..blocks {
        // nodes owned by this block (node 0 belongs to block 0)
        let lo = if block == 0 { 0 } else { block * cfg.block_steps + 1 };
        let hi = (block + 1) * cfg.block_steps + 1;
        let mut prev_update = f64::INFINITY;
        let mut first_update = f64::NAN;
        let mut converged = false;
        for _ in 0..cfg.max_iterations {
            iterations += 1;
            let target = rhs(&w, cfg);
            if !target.is_finite() {
                return Err(Error::NonFinite(iterations));
            }
            let mut next = w.clone();
            for n in lo..hi {
                *next.snapshot_mut(n) = w
                    .snapshot(n)
                    .scaled(1.0 - theta)
                    .add(&target.snapshot(n).scaled(theta));
            }
            let scale = {
                let mut sq = 0.0;
                for n in lo..hi {
                    let norm = next.snapshot(n).scalar_norm();
                    sq += norm * norm;
                }
                (sq * cfg.grid.h()).sqrt()
            };
            let update = block_update_norm(&next, &w, lo, hi);
            let rel = update / scale.max(1e-300);
            update_norms.push(rel);
            if update > prev_update && theta > 1.0 / 16.0 {
                theta = (theta / 2.0).max(1.0 / 16.0);
            }
            prev_update = update;
            if first_update.is_nan() {
                first_update = update;
            }
            w = next;
            if rel <= cfg.tolerance || scale == 0.0 {
                converged = true;
                break;
            }
        }
        if !converged {
            let last = *update_norms.last().unwrap();
            return Err(Error::NoConvergence {
                iterations,
                last_update: last,
                diverging: prev_update > first_update * 10.0,
            });
        }
    }

    // assemble the bundle
    let v = recover_velocity(&w, cfg);
    let u = if background_is_zero { v } else { v.add(u0) };
    // under w = u_t - rho*Lap(u) - grad p the physical pressure solves
    // Lap p = div w, so p = -(potential of the reformulation) and
    // grad p = +(gradient part of w)
    let p: Vec<SpectralField> = w
        .snapshots()
        .iter()
        .map(|snap| pressure_potential(snap).scaled(-1.0))
        .collect();
    let grad_p = SpaceTimeField::new(
        cfg.grid,
        p.iter().map(gradient).collect(),
    );
    let w_norm = w.scalar_norm_series();
    let f_norm = f.scalar_norm_series();
    let p_norm = TimeSeries::new(
        cfg.grid,
        p.iter().map(|q| q.l2_norm()).collect(),
    )?;
    let mut bundle = SolutionBundle {
        w,
        u,
        grad_p,
        p,
        iterations,
        update_norms,
        w_norm,
        f_norm,
        p_norm,
        residual: TimeSeries::zeros(cfg.grid),
        residual_budget: TimeSeries::zeros(cfg.grid),
    };
    bundle.residual = nse_residual(&bundle, f, cfg);
    bundle.residual_budget = residual_budget(&bundle, cfg);
    let _ = nn;
    Ok(bundle)
}

/// Strong-form momentum residual per node:
/// `|| u_t - rho*Lap(u) +/- (u.grad)u + grad p - f ||_{L2(Omega)}`,
/// with `u_t` by central differences (one-sided at the ends).
pub fn nse_residual(
    bundle: &SolutionBundle,
    f: &SpaceTimeField,
    cfg: &SolveConfig,
) -> TimeSeries {
    let grid = bundle.u.grid();
    let h = grid.h();
    let nn = grid.num_nodes();
    let s = cfg.sign.factor();
    let conv = nonlinear_term(&bundle.u);
    let mut vals = Vec::with_capacity(nn);
    for n in 0..nn {
        let ut = if n == 0 {
            bundle.u.snapshot(1).sub(bundle.u.snapshot(0)).scaled(1.0 / h)
        } else if n == nn - 1 {
            bundle
                .u
                .snapshot(nn - 1)
                .sub(bundle.u.snapshot(nn - 2))
                .scaled(1.0 / h)
        } else {
            bundle
                .u
                .snapshot(n + 1)
                .sub(bundle.u.snapshot(n - 1))
                .scaled(0.5 / h)
        };
        let lap = bundle.u.snapshot(n).map(|c| c.laplacian()).scaled(cfg.hp.rho());
        let e = ut
            .sub(&lap)
            .add(&conv.snapshot(n).scaled(s))
            .add(bundle.grad_p.snapshot(n))
            .sub(f.snapshot(n));
        vals.push(e.scalar_norm());
    }
    TimeSeries::new(grid, vals).expect("residual is finite")
}

/// Bound the residual [`nse_residual`] should respect: the
/// central-difference truncation `h^2/6 * ||u_ttt||` at interior nodes,
/// the one-sided `h/2 * ||u_tt||` at the two ends, plus the fixed-point
/// tolerance slack. Third and second time derivatives are estimated by
/// finite differences of the solution itself.
pub fn residual_budget(bundle: &SolutionBundle, cfg: &SolveConfig) -> TimeSeries {
    let grid = bundle.u.grid();
    let h = grid.h();
    let nn = grid.num_nodes();
    let mut m2 = 0.0f64;
    for n in 1..nn - 1 {
        let d2 = bundle
            .u
            .snapshot(n + 1)
            .sub(&bundle.u.snapshot(n).scaled(2.0))
            .add(bundle.u.snapshot(n - 1))
            .scaled(1.0 / (h * h));
        m2 = m2.max(d2.scalar_norm());
    }
    let mut m3 = 0.0f64;
    for n in 2..nn.saturating_sub(2) {
        let d3 = bundle
            .u
            .snapshot(n + 2)
            .sub(&bundle.u.snapshot(n + 1).scaled(2.0))
            .add(&bundle.u.snapshot(n - 1).scaled(2.0))
            .sub(bundle.u.snapshot(n - 2))
            .scaled(1.0 / (2.0 * h * h * h));
        m3 = m3.max(d3.scalar_norm());
    }
    let slack = cfg.tolerance
        * (bundle.w_norm.linf_norm() + bundle.f_norm.linf_norm()).max(1.0)
        + 1e-12 * bundle.f_norm.linf_norm().max(1.0);
    let interior = h * h / 6.0 * m3 + slack;
    let ends = h / 2.0 * m2 + slack;
    TimeSeries::new(
        grid,
        (0..nn)
            .map(|n| if n == 0 || n == nn - 1 { ends } else { interior })
            .collect(),
    )
    .expect("budget is finite")
}

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

/// A registered closed-form divergence-free velocity family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedSpec {
    /// Family identifier; `"decaying-swirl"` is
    /// `u* = eps * e^{-lambda t} (sin x2, sin x3, sin x1)`.
    pub family: String,
    pub epsilon: f64,
    pub lambda: f64,
}

/// Exact solution, zero-mean pressure, and matching forcing of a
/// manufactured family: `f` is the momentum equation evaluated
/// analytically on `u*` under the configured sign convention, built
/// directly in spectral coefficients.
pub fn manufactured_forcing(
    spec: &ManufacturedSpec,
    cfg: &SolveConfig,
) -> Result<(SpaceTimeField, SpaceTimeField, Vec<SpectralField>), Error> {
    if spec.family != "decaying-swirl" {
        return Err(Error::UnknownFamily(spec.family.clone()));
    }
    let domain = cfg.domain;
    let lens = domain.lengths();
    if lens.iter().any(|&l| (l - 2.0 * std::f64::consts::PI).abs() > 1e-12) {
        return Err(Error::Config(
            "the decaying-swirl family needs the 2*pi box".into(),
        ));
    }
    let eps = spec.epsilon;
    let lam = spec.lambda;
    let s = cfg.sign.factor();
    // unit-amplitude shape (sin x2, sin x3, sin x1)
    let shape = SpectralVectorField::new([
        SpectralField::sin_mode(domain, 1, 1, 1.0),
        SpectralField::sin_mode(domain, 2, 1, 1.0),
        SpectralField::sin_mode(domain, 0, 1, 1.0),
    ]);
    // its convection: (sin x3 cos x2, sin x1 cos x3, sin x2 cos x1),
    // with sin A cos B = (sin(A+B) + sin(A-B)) / 2
    let half_sum = |k_plus: [i64; 3], k_minus: [i64; 3]| -> SpectralField {
        let mut f = SpectralField::zero(domain);
        f.add_real_mode(k_plus, num_complex::Complex64::new(0.0, -0.25));
        f.add_real_mode(k_minus, num_complex::Complex64::new(0.0, -0.25));
        f
    };
    let conv_shape = SpectralVectorField::new([
        half_sum([0, 1, 1], [0, -1, 1]), // sin x3 cos x2
        half_sum([1, 0, 1], [1, 0, -1]), // sin x1 cos x3
        half_sum([1, 1, 0], [-1, 1, 0]), // sin x2 cos x1
    ]);
    // u*_t - rho*Lap(u*) = (rho - lambda) u* since each component is a
    // single unit-frequency mode; the convection is itself
    // divergence-free so p* = 0
    let u_star = SpaceTimeField::from_fn(domain, cfg.grid, |_, t| {
        shape.scaled(eps * (-lam * t).exp())
    });
    let rho = cfg.hp.rho();
    let f = SpaceTimeField::from_fn(domain, cfg.grid, |_, t| {
        let lin = shape.scaled(eps * (rho - lam) * (-lam * t).exp());
        let quad = conv_shape.scaled(s * eps * eps * (-2.0 * lam * t).exp());
        lin.add(&quad)
    });
    let p_star = vec![SpectralField::zero(domain); cfg.grid.num_nodes()];
    Ok((f, u_star, p_star))
}
