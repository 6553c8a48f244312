//! The heat Green operator `G` (Duhamel integral with zero initial
//! data), its gradient composition `G_x`, the heat semigroup, the inverse
//! Laplacian, and the numerical harnesses for the whole-space
//! heat-kernel estimates and Sobolev potential bounds.
//!
//! Every spectral operator here is mode-wise exact: a Fourier mode `k`
//! of the heat equation is the scalar ODE `u' + rho*|kappa|^2 u = f`, so
//! the Duhamel integral is evaluated with the exponential integrator
//! that is exact for forcing piecewise-linear in time between nodes.

use crate::error::Error;
use crate::fields::{SpaceTimeField, SpectralField, SpectralVectorField, TimeGrid};
use num_complex::Complex64;
use std::io::Write;

/// Heat-equation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatParams {
    rho: f64,
}

impl HeatParams {
    pub fn new(rho: f64) -> Result<Self, Error> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "viscosity must be positive, got {rho}"
            )));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Step weights of the exponential integrator on one cell of width `h`
/// for decay rate `a`: `u(h) = E*u(0) + w0*f(0) + w1*f(h)` where the
/// forcing is linear on the cell. Exact up to round-off; the series
/// branch avoids cancellation for small `a*h`.
fn exp_step_weights(a: f64, h: f64) -> (f64, f64, f64) {
    let x = a * h;
    let e = (-x).exp();
    let (i0, i1);
    if x < 1e-3 {
        // I0 = int_0^h e^{-a(h-s)} ds, I1 = int_0^h s e^{-a(h-s)} ds
        i0 = h * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0 + x * x * x * x / 120.0);
        i1 = h
            * h
            * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0 + x * x * x * x / 720.0);
    } else {
        i0 = (1.0 - e) / a;
        i1 = h / a - (1.0 - e) / (a * a);
    }
    // f(s) = f0 + s*(f1-f0)/h  =>  contribution f0*(I0 - I1/h) + f1*I1/h
    (e, i0 - i1 / h, i1 / h)
}

/// Duhamel integral of the heat equation with zero initial data:
/// `u_t - rho*Lap(u) = f`, `u(.,0) = 0`, exact for each Fourier mode
/// when the forcing is piecewise linear in time.
pub fn heat_solve(forcing: &SpaceTimeField, hp: HeatParams) -> SpaceTimeField {
    let domain = forcing.domain();
    let grid = forcing.grid();
    let h = grid.h();
    let nn = grid.num_nodes();
    let mut out = SpaceTimeField::zero(domain, grid);
    for (i, k) in domain.modes() {
        let a = hp.rho * domain.kappa_sq(k);
        let (e, w0, w1) = exp_step_weights(a, h);
        for c in 0..3 {
            let mut u = Complex64::default();
            for n in 0..nn - 1 {
                let f0 = forcing.snapshot(n).component(c).coeffs()[i];
                let f1 = forcing.snapshot(n + 1).component(c).coeffs()[i];
                u = e * u + w0 * f0 + w1 * f1;
                out.snapshot_mut(n + 1).component_mut(c).coeffs_mut()[i] = u;
            }
        }
    }
    out
}

/// `G_x` along `axis`: the spatial derivative of the Duhamel solution,
/// i.e. `derivative(heat_solve(f), axis)` evaluated mode-wise.
pub fn grad_green(forcing: &SpaceTimeField, hp: HeatParams, axis: usize) -> SpaceTimeField {
    assert!(axis < 3, "invalid axis {axis}");
    heat_solve(forcing, hp).map_snapshots(|s| s.map(|c| c.derivative(axis)))
}

/// Heat semigroup from initial data `a`: `u(.,t) = e^{rho*Lap*t} a`.
pub fn heat_flow(a: &SpectralVectorField, hp: HeatParams, grid: TimeGrid) -> SpaceTimeField {
    let domain = a.domain();
    SpaceTimeField::from_fn(domain, grid, |_, t| {
        let mut s = SpectralVectorField::zero(domain);
        for c in 0..3 {
            for (i, k) in domain.modes() {
                let decay = (-hp.rho * domain.kappa_sq(k) * t).exp();
                s.component_mut(c).coeffs_mut()[i] = decay * a.component(c).coeffs()[i];
            }
        }
        s
    })
}

/// Inverse Laplacian in the zero-mean gauge: `c(k) -> -c(k)/|kappa|^2`
/// for `k != 0`, output mean set to zero. Returns the dropped input mean
/// alongside the field so callers can flag a solvability violation.
pub fn inverse_laplacian(f: &SpectralField) -> (SpectralField, f64) {
    let domain = f.domain();
    let mut out = SpectralField::zero(domain);
    let mut mean = 0.0;
    for (i, k) in domain.modes() {
        if k == [0, 0, 0] {
            mean = f.coeffs()[i].re;
            continue;
        }
        out.coeffs_mut()[i] = -f.coeffs()[i] / domain.kappa_sq(k);
    }
    (out, mean)
}

// ---------------------------------------------------------------------------
// Whole-space heat-kernel estimates
// ---------------------------------------------------------------------------

/// Whole-space heat kernel `Phi(x, t) = (4 pi rho t)^{-3/2}
/// exp(-|x|^2 / (4 rho t))` at spatial offset `|x| = offset` and time
/// gap `t = gap`.
pub fn whole_space_kernel(offset: f64, gap: f64, hp: HeatParams) -> Result<f64, Error> {
    if !(gap > 0.0) {
        return Err(Error::NonpositiveGap(gap));
    }
    let d = 4.0 * hp.rho * gap;
    Ok((std::f64::consts::PI * d).powf(-1.5) * (-offset * offset / d).exp())
}

/// `|grad Phi| = Phi * |x| / (2 rho t)`.
pub fn whole_space_kernel_gradient(offset: f64, gap: f64, hp: HeatParams) -> Result<f64, Error> {
    Ok(whole_space_kernel(offset, gap, hp)? * offset / (2.0 * hp.rho * gap))
}

/// Which kernel bound is being scanned: the kernel value weighted by
/// `gap^mu * offset^(3 - 2 mu)`, or the kernel gradient weighted by
/// `gap^mu * offset^(4 - 2 mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelEstimate {
    Value,
    Gradient,
}

impl KernelEstimate {
    pub fn id(&self) -> &'static str {
        match self {
            KernelEstimate::Value => "value",
            KernelEstimate::Gradient => "gradient",
        }
    }

    fn check_order(&self, mu: f64) -> Result<(), Error> {
        let ok = match self {
            KernelEstimate::Value => mu > 0.0 && mu < 1.0,
            KernelEstimate::Gradient => mu > 0.5 && mu < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidOrder(
                mu,
                match self {
                    KernelEstimate::Value => "(0, 1) for the kernel-value bound",
                    KernelEstimate::Gradient => "(1/2, 1) for the kernel-gradient bound",
                },
            ))
        }
    }
}

/// One evaluation point of a kernel-estimate scan.
#[derive(Debug, Clone, Copy)]
pub struct KernelSample {
    pub gap: f64,
    pub offset: f64,
    pub kernel_value: f64,
    pub weighted_value: f64,
}

/// Log-spaced sampling rectangle in (gap, offset).
#[derive(Debug, Clone, Copy)]
pub struct SamplePlan {
    pub gap_range: (f64, f64),
    pub offset_range: (f64, f64),
    pub gap_count: usize,
    pub offset_count: usize,
}

impl SamplePlan {
    fn log_points(range: (f64, f64), count: usize) -> Vec<f64> {
        assert!(range.0 > 0.0 && range.1 > range.0 && count >= 2);
        let (a, b) = (range.0.ln(), range.1.ln());
        (0..count)
            .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
            .collect()
    }
}

/// Result of a kernel-estimate scan: the empirical constant (supremum of
/// the weighted kernel over the plan), the maximizing sample, and every
/// scanned row with its running supremum.
#[derive(Debug, Clone)]
pub struct KernelFit {
    pub mu: f64,
    pub estimate: KernelEstimate,
    pub constant: f64,
    pub best: KernelSample,
    pub rows: Vec<KernelSample>,
}

/// Scan the weighted whole-space kernel over a log-spaced (gap, offset)
/// grid and return the fitted constant of the corresponding bound.
pub fn kernel_estimate_constant(
    mu: f64,
    estimate: KernelEstimate,
    hp: HeatParams,
    plan: &SamplePlan,
) -> Result<KernelFit, Error> {
    estimate.check_order(mu)?;
    let gaps = SamplePlan::log_points(plan.gap_range, plan.gap_count);
    let offsets = SamplePlan::log_points(plan.offset_range, plan.offset_count);
    let mut rows = Vec::with_capacity(gaps.len() * offsets.len());
    let mut best: Option<KernelSample> = None;
    for &g in &gaps {
        for &r in &offsets {
            let (value, exponent) = match estimate {
                KernelEstimate::Value => (whole_space_kernel(r, g, hp)?, 3.0 - 2.0 * mu),
                KernelEstimate::Gradient => {
                    (whole_space_kernel_gradient(r, g, hp)?, 4.0 - 2.0 * mu)
                }
            };
            let sample = KernelSample {
                gap: g,
                offset: r,
                kernel_value: value,
                weighted_value: value * g.powf(mu) * r.powf(exponent),
            };
            if best.map_or(true, |b| sample.weighted_value > b.weighted_value) {
                best = Some(sample);
            }
            rows.push(sample);
        }
    }
    let best = best.expect("plan is nonempty");
    Ok(KernelFit {
        mu,
        estimate,
        constant: best.weighted_value,
        best,
        rows,
    })
}

/// CSV dump of a scan: `mu, estimate_id, gap, offset, weighted_value,
/// running_sup`.
pub fn write_kernel_csv<W: Write>(w: &mut W, fit: &KernelFit) -> Result<(), Error> {
    writeln!(w, "mu,estimate_id,gap,offset,weighted_value,running_sup")?;
    let mut sup = 0.0f64;
    for row in &fit.rows {
        sup = sup.max(row.weighted_value);
        writeln!(
            w,
            "{},{},{:e},{:e},{:e},{:e}",
            fit.mu,
            fit.estimate.id(),
            row.gap,
            row.offset,
            row.weighted_value,
            sup
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sobolev potential
// ---------------------------------------------------------------------------

/// Direct-summation cap for [`sobolev_potential`] (`M <= 24`).
pub const SOBOLEV_GRID_CAP: usize = 24;

/// Riesz-type potential `u(x) = int f(xi) |x - xi|^{lambda - 3} d xi` on
/// a cube of side `length` sampled on an `m^3` grid, by direct
/// summation; the singular self-cell is integrated analytically over the
/// volume-equivalent ball.
pub fn sobolev_potential(
    samples: &[f64],
    m: usize,
    length: f64,
    lambda: f64,
) -> Result<Vec<f64>, Error> {
    if !(lambda > 0.0 && lambda < 3.0) {
        return Err(Error::InvalidExponent(format!(
            "lambda must lie in (0, 3), got {lambda}"
        )));
    }
    if m > SOBOLEV_GRID_CAP {
        return Err(Error::GridTooLarge(m, SOBOLEV_GRID_CAP));
    }
    if samples.len() != m * m * m {
        return Err(Error::SampleCountMismatch {
            expected: m * m * m,
            got: samples.len(),
        });
    }
    let hx = length / m as f64;
    let cell = hx * hx * hx;
    // equivalent-ball radius of one cell and the analytic integral of
    // the kernel over it: int_ball |y|^{lambda-3} dy = 4 pi R^lambda / lambda
    let r_eq = (3.0 * cell / (4.0 * std::f64::consts::PI)).cbrt();
    let self_weight = 4.0 * std::f64::consts::PI * r_eq.powf(lambda) / lambda;
    // the kernel depends only on the integer offset; tabulate it once
    let side = 2 * m - 1;
    let mut kernel = vec![0.0; side * side * side];
    for dx in 0..side {
        let rx = (dx as f64 - (m - 1) as f64) * hx;
        for dy in 0..side {
            let ry = (dy as f64 - (m - 1) as f64) * hx;
            for dz in 0..side {
                let rz = (dz as f64 - (m - 1) as f64) * hx;
                let r2 = rx * rx + ry * ry + rz * rz;
                kernel[(dx * side + dy) * side + dz] = if r2 == 0.0 {
                    self_weight
                } else {
                    r2.powf(0.5 * (lambda - 3.0)) * cell
                };
            }
        }
    }
    let mut out = vec![0.0; samples.len()];
    for xi in 0..m {
        for yi in 0..m {
            for zi in 0..m {
                let mut acc = 0.0;
                for xj in 0..m {
                    let ox = (xi + m - 1 - xj) * side;
                    for yj in 0..m {
                        let oy = (ox + yi + m - 1 - yj) * side + zi + m - 1;
                        let row = (xj * m + yj) * m;
                        for zj in 0..m {
                            acc += samples[row + zj] * kernel[oy - zj];
                        }
                    }
                }
                out[(xi * m + yi) * m + zi] = acc;
            }
        }
    }
    Ok(out)
}
