//! Fractional integration, Abel inversion, and the Beta/Gamma constants
//! they carry.
//!
//! The workhorse is product integration: on each time cell the smooth
//! factor is its piecewise-linear interpolant and the power kernel
//! `(t - tau)^alpha` is integrated exactly, so the singular kernels
//! `alpha = -mu` (and the smoothing kernels `alpha = 1 - mu` used by the
//! inequality chain) never meet a naive quadrature rule.

use crate::error::Error;
use crate::fields::TimeSeries;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Fractional order `mu` in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(mu: f64) -> Result<Self, Error> {
        if mu > 0.0 && mu < 1.0 {
            Ok(Self(mu))
        } else {
            Err(Error::InvalidOrder(mu, "(0, 1)"))
        }
    }

    /// Orders admissible for the solver-side inequality chain.
    pub fn solver_range(mu: f64) -> Result<Self, Error> {
        if mu >= 0.625 && mu < 1.0 {
            Ok(Self(mu))
        } else {
            Err(Error::InvalidOrder(mu, "[5/8, 1)"))
        }
    }

    pub fn mu(&self) -> f64 {
        self.0
    }
}

/// The Beta-type constant
/// `Gamma(1 - mu1) Gamma(1 - mu2) / Gamma(2 - mu1 - mu2)` governing the
/// composition of two fractional integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaConstant {
    pub mu1: f64,
    pub mu2: f64,
    pub value: f64,
}

/// `J^{mu1} J^{mu2} g = GammaConstant * int_0^t g(tau) (t-tau)^{1-mu1-mu2} dtau`.
pub fn composition_constant(mu1: f64, mu2: f64) -> GammaConstant {
    assert!(mu1 < 1.0 && mu2 < 1.0, "orders must be < 1");
    GammaConstant {
        mu1,
        mu2,
        value: gamma(1.0 - mu1) * gamma(1.0 - mu2) / gamma(2.0 - mu1 - mu2),
    }
}

/// `Gamma(mu) Gamma(1 - mu) = pi / sin(pi mu)`, the normalizer of the
/// `F_mu` transform.
pub fn reflection_constant(mu: FracOrder) -> f64 {
    PI / (PI * mu.mu()).sin()
}

/// Euler Beta function via Gamma.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    gamma(a) * gamma(b) / gamma(a + b)
}

/// Exact integral of `(t_i - tau)^alpha` against the linear interpolant
/// of `u` on every cell: `sum_cells int u_lin(tau) (t_i - tau)^alpha dtau`
/// for each output node `t_i`. Valid for `alpha > -1`.
pub fn power_kernel_integral(u: &TimeSeries, alpha: f64) -> TimeSeries {
    assert!(alpha > -1.0, "kernel exponent must exceed -1");
    let h = u.grid().h();
    let nn = u.len();
    let v = u.values();
    // cell at distance d from the output node contributes
    // ca(d)*u_left + cb(d)*u_right, with s = t_i - tau in [A, B],
    // A = (d-1)h, B = dh
    let mut ca = vec![0.0; nn];
    let mut cb = vec![0.0; nn];
    for d in 1..nn {
        let a = (d - 1) as f64 * h;
        let b = d as f64 * h;
        let m0 = (b.powf(1.0 + alpha) - a.powf(1.0 + alpha)) / (1.0 + alpha);
        let m1 = (b.powf(2.0 + alpha) - a.powf(2.0 + alpha)) / (2.0 + alpha);
        ca[d] = (m1 - a * m0) / h;
        cb[d] = (b * m0 - m1) / h;
    }
    let mut out = vec![0.0; nn];
    for i in 1..nn {
        let mut acc = 0.0;
        for d in 1..=i {
            acc += ca[d] * v[i - d] + cb[d] * v[i - d + 1];
        }
        out[i] = acc;
    }
    TimeSeries::new(u.grid(), out).expect("same grid")
}

/// [`power_kernel_integral`] evaluated at one arbitrary time `t` inside
/// the grid, handling the partial last cell exactly.
pub fn power_kernel_integral_at(u: &TimeSeries, alpha: f64, t: f64) -> f64 {
    assert!(alpha > -1.0, "kernel exponent must exceed -1");
    let h = u.grid().h();
    assert!(t >= 0.0 && t <= u.grid().horizon() * (1.0 + 1e-12));
    let v = u.values();
    let full = ((t / h).floor() as usize).min(u.len() - 1);
    let mut acc = 0.0;
    let cell = |left: f64, right: f64, vl: f64, vr: f64| -> f64 {
        // s = t - tau runs over [t - right, t - left]
        let a = t - right;
        let b = t - left;
        if b <= a {
            return 0.0;
        }
        let m0 = (b.powf(1.0 + alpha) - a.powf(1.0 + alpha)) / (1.0 + alpha);
        let m1 = (b.powf(2.0 + alpha) - a.powf(2.0 + alpha)) / (2.0 + alpha);
        let w = right - left;
        // linear interpolant on [left, right] in terms of s
        (vl * (m1 - a * m0) + vr * (b * m0 - m1)) / w
    };
    for j in 0..full {
        acc += cell(j as f64 * h, (j + 1) as f64 * h, v[j], v[j + 1]);
    }
    if t > full as f64 * h && full + 1 < u.len() {
        let frac = (t - full as f64 * h) / h;
        let vt = v[full] + frac * (v[full + 1] - v[full]);
        acc += cell(full as f64 * h, t, v[full], vt);
    }
    acc
}

/// Fractional integral `J^mu u(t) = int_0^t u(tau) (t - tau)^{-mu} dtau`
/// by product integration; `J^mu u(0) = 0`.
pub fn frac_integral(u: &TimeSeries, mu: FracOrder) -> TimeSeries {
    power_kernel_integral(u, -mu.mu())
}

/// Inverse of [`frac_integral`]: recover `u` from `f = J^mu u`.
///
/// The product-integration rule is lower-triangular in the node values,
/// so the inverse is a forward substitution; the rank gap left by the
/// trivial `f(0) = 0` row is closed by requiring `u` to be locally
/// linear at the origin (`u_0 = 2 u_1 - u_2`), which is exact for
/// constant and linear `u` and second-order accurate otherwise.
pub fn abel_invert(f: &TimeSeries, mu: FracOrder) -> Result<TimeSeries, Error> {
    let nn = f.len();
    if nn < 3 {
        return Err(Error::TooFewTimeNodes { need: 3, got: nn });
    }
    let scale = f.linf_norm();
    if f.values()[0].abs() > 1e-8 * scale.max(1.0) {
        return Err(Error::NonzeroOrigin(f.values()[0]));
    }
    let h = f.grid().h();
    let alpha = -mu.mu();
    let mut ca = vec![0.0; nn];
    let mut cb = vec![0.0; nn];
    for d in 1..nn {
        let a = (d - 1) as f64 * h;
        let b = d as f64 * h;
        let m0 = (b.powf(1.0 + alpha) - a.powf(1.0 + alpha)) / (1.0 + alpha);
        let m1 = (b.powf(2.0 + alpha) - a.powf(2.0 + alpha)) / (2.0 + alpha);
        ca[d] = (m1 - a * m0) / h;
        cb[d] = (b * m0 - m1) / h;
    }
    let fv = f.values();
    let mut u = vec![0.0; nn];
    // first block: rows f_1, f_2 plus the local-linearity closure
    // f_1 = ca1 u0 + cb1 u1
    // f_2 = ca2 u0 + (ca1 + cb2) u1 + cb1 u2,  u0 = 2 u1 - u2
    let a11 = 2.0 * ca[1] + cb[1];
    let a12 = -ca[1];
    let a21 = 2.0 * ca[2] + ca[1] + cb[2];
    let a22 = cb[1] - ca[2];
    let det = a11 * a22 - a12 * a21;
    u[1] = (fv[1] * a22 - fv[2] * a12) / det;
    u[2] = (fv[2] * a11 - fv[1] * a21) / det;
    u[0] = 2.0 * u[1] - u[2];
    for i in 3..nn {
        let mut acc = ca[i] * u[0];
        for j in 1..i {
            acc += (ca[i - j] + cb[i - j + 1]) * u[j];
        }
        u[i] = (fv[i] - acc) / cb[1];
    }
    TimeSeries::new(f.grid(), u)
}

fn check_nonnegative(s: &TimeSeries) -> Result<(), Error> {
    for (node, &value) in s.values().iter().enumerate() {
        if value < 0.0 {
            return Err(Error::NegativeInput { node, value });
        }
    }
    Ok(())
}

/// `F_mu(t) = (2 / (Gamma(mu) Gamma(1-mu))) * J^mu(fsq)(t)` for a
/// nonnegative series `fsq`.
pub fn f_mu_transform(fsq: &TimeSeries, mu: FracOrder) -> Result<TimeSeries, Error> {
    check_nonnegative(fsq)?;
    let c = 2.0 / reflection_constant(mu);
    Ok(frac_integral(fsq, mu).map(|v| c * v))
}

/// Produce a member of the class of right-hand sides representable as a
/// smoothing integral of a square:
/// `fsq(t) = int_0^t g(tau)^2 (t - tau)^{-(1-mu)} dtau`.
/// Feeding the result through [`f_mu_transform`] yields a nondecreasing
/// series equal to `2 int_0^t g^2`.
pub fn sample_lplus(g: &TimeSeries, mu: FracOrder) -> Result<TimeSeries, Error> {
    check_nonnegative(g)?;
    Ok(power_kernel_integral(&g.map(|v| v * v), mu.mu() - 1.0))
}

/// Hardy–Littlewood exponent law: `J^mu` maps `L_p(0,t)` into `L_q(0,t)`
/// with `q = p / (1 - p (1 - mu))`, for `1 < p < 1/(1 - mu)`.
pub fn hl_exponent(p: f64, mu: FracOrder) -> Result<f64, Error> {
    let limit = 1.0 / (1.0 - mu.mu());
    if !(p > 1.0 && p < limit) {
        return Err(Error::InvalidExponent(format!(
            "p = {p} outside (1, {limit}) for mu = {}",
            mu.mu()
        )));
    }
    Ok(p / (1.0 - p * (1.0 - mu.mu())))
}

/// Sign condition of the quadratic Mellin coefficient:
/// `2 b1^2 - k * B(1 - s - mu, mu)`, negative once `k` exceeds
/// [`beta_gap_threshold`].
pub fn beta_gap(b1: f64, k: f64, s: f64, mu: FracOrder) -> Result<f64, Error> {
    Ok(2.0 * b1 * b1 - k * beta_mellin(s, mu)?)
}

/// `k` above which [`beta_gap`] turns negative.
pub fn beta_gap_threshold(b1: f64, s: f64, mu: FracOrder) -> Result<f64, Error> {
    Ok(2.0 * b1 * b1 / beta_mellin(s, mu)?)
}

fn beta_mellin(s: f64, mu: FracOrder) -> Result<f64, Error> {
    let total = s + mu.mu();
    if !(total > 0.0 && total < 1.0) {
        return Err(Error::InvalidExponent(format!(
            "s + mu = {total} outside (0, 1)"
        )));
    }
    Ok(beta_fn(1.0 - total, mu.mu()))
}
