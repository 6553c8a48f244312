//! Verification harnesses for the inequality chain behind the
//! fixed-point argument: the bilinear estimate, the norm inequalities
//! that feed the Riccati substitution, the key integral inequality with
//! its mean-value construction, the a priori energy bound, and the
//! empirical operator-norm harnesses for the fractional-integral and
//! potential operators.
//!
//! Every check is pure over immutable inputs and returns a report with
//! both sides of the inequality as series, fitted constants, the worst
//! margin, and a pass flag. Strict inequalities are accepted up to a
//! relative tolerance of `1e-10` times the scale of the series, so
//! exact-boundary cases (e.g. both sides identically zero) pass.

use crate::error::Error;
use crate::fields::{
    mixed_norm, SpaceTimeField, SpectralField, SpectralVectorField, TimeGrid, TimeSeries,
};
use crate::fraccalc::{
    beta_gap_threshold, f_mu_transform, frac_integral, hl_exponent, power_kernel_integral,
    power_kernel_integral_at, reflection_constant, FracOrder,
};
use crate::greenop::{grad_green, heat_solve, sobolev_potential, HeatParams};
use crate::sampling::{random_series, random_space_time_field};
use crate::solver::{nonlinear_term, SolutionBundle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Relative margin tolerance for strict inequalities.
pub const MARGIN_TOL: f64 = 1e-10;

/// Outcome of one inequality check: both sides as series over the time
/// grid, any fitted constants, and the worst (most negative) margin
/// `rhs - lhs` over the nodes.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub id: String,
    #[serde(skip)]
    pub lhs: TimeSeries,
    #[serde(skip)]
    pub rhs: TimeSeries,
    pub constants: Vec<(String, f64)>,
    pub min_margin: f64,
    pub pass: bool,
    pub notes: String,
}

impl InequalityReport {
    /// Build a report from the two sides; pass iff the minimum margin
    /// clears `-MARGIN_TOL * scale` where the scale is the largest
    /// magnitude appearing on either side.
    pub fn from_series(
        id: impl Into<String>,
        lhs: TimeSeries,
        rhs: TimeSeries,
        constants: Vec<(String, f64)>,
        notes: impl Into<String>,
    ) -> Self {
        assert_eq!(lhs.grid(), rhs.grid(), "report sides share a grid");
        let scale = lhs.linf_norm().max(rhs.linf_norm());
        let min_margin = lhs
            .values()
            .iter()
            .zip(rhs.values())
            .map(|(&l, &r)| r - l)
            .fold(f64::INFINITY, f64::min);
        let pass = min_margin.is_finite()
            && rhs.values().iter().all(|v| v.is_finite())
            && min_margin >= -MARGIN_TOL * scale;
        Self {
            id: id.into(),
            lhs,
            rhs,
            constants,
            min_margin,
            pass,
            notes: notes.into(),
        }
    }
}

/// Minimal constant `c` with `num <= c * den` over the interior nodes
/// (node 0 excluded: both sides of the fitted inequalities vanish
/// there). Denominator values at roundoff level relative to the peak
/// are skipped unless the numerator is genuinely nonzero there, in
/// which case no finite constant works and infinity is returned.
fn fit_constant(num: &TimeSeries, den: &TimeSeries) -> f64 {
    let den_floor = 1e-13 * den.linf_norm();
    let num_floor = 1e-13 * num.linf_norm();
    let mut c = 0.0f64;
    for i in 1..num.len() {
        let (n, d) = (num.values()[i], den.values()[i]);
        if d > den_floor {
            c = c.max(n / d);
        } else if n > num_floor && n > 0.0 {
            return f64::INFINITY;
        }
    }
    c
}

fn require_nonnegative(s: &TimeSeries) -> Result<(), Error> {
    for (node, &value) in s.values().iter().enumerate() {
        if value < 0.0 {
            return Err(Error::NegativeInput { node, value });
        }
    }
    Ok(())
}

/// Component-summed `L2(Omega)` norm series of the auxiliary field, the
/// forcing, and the pressure of a solve.
pub fn norms_from_bundle(
    bundle: &SolutionBundle,
    f: &SpaceTimeField,
) -> Result<(TimeSeries, TimeSeries, TimeSeries), Error> {
    if f.domain() != bundle.w.domain() {
        return Err(Error::DomainMismatch);
    }
    if f.grid() != bundle.w.grid() {
        return Err(Error::GridMismatch);
    }
    let p = TimeSeries::new(
        bundle.w.grid(),
        bundle.p.iter().map(SpectralField::l2_norm).collect(),
    )?;
    Ok((
        bundle.w.scalar_norm_series(),
        f.scalar_norm_series(),
        p,
    ))
}

/// Bilinear estimate: the convection of the heat potential of `g` is
/// controlled by the squared fractional integral of the norm series of
/// `g`,
///
/// ```text
/// || sum_j (Gg)_j d_j (Gg) ||_{L2}(t)  <=  b * (J^mu gbar)(t)^2 .
/// ```
///
/// Fits the minimal `b` over the grid; passes when a finite `b` covers
/// all nodes.
pub fn check_bilinear(
    g: &SpaceTimeField,
    mu: FracOrder,
    hp: HeatParams,
) -> Result<InequalityReport, Error> {
    let mu = FracOrder::solver_range(mu.mu())?;
    let v = heat_solve(g, hp);
    let lhs = nonlinear_term(&v).scalar_norm_series();
    let gbar = g.scalar_norm_series();
    let base = frac_integral(&gbar, mu).map(|x| x * x);
    let b = fit_constant(&lhs, &base);
    let rhs = base.map(|x| if b.is_finite() { b * x } else { x });
    let mut report = InequalityReport::from_series(
        "bilinear",
        lhs,
        rhs,
        vec![("b".into(), b)],
        "convection of the heat potential vs squared fractional integral",
    );
    report.pass = report.pass && b.is_finite();
    Ok(report)
}

/// The two norm inequalities feeding the Riccati substitution, plus the
/// pressure-vs-field consistency bound:
///
/// 1. `w(t) < f(t) + b  (J^mu (w + p))(t)^2`
/// 2. `w(t) < f(t) + b1 (J^mu w^2)(t)`
/// 3. `J^mu(p^2) <= c J^mu(w^2)` with fitted `c`, asserted `c <= 3`.
///
/// All constants are fitted minimally over the interior nodes; each
/// report then restates the inequality with its fitted constant, so the
/// margins are zero up to roundoff and the interesting output is the
/// constants themselves.
pub fn check_32_34(
    w: &TimeSeries,
    f: &TimeSeries,
    p: &TimeSeries,
    mu: FracOrder,
) -> Result<[InequalityReport; 3], Error> {
    if w.grid() != f.grid() || w.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    require_nonnegative(w)?;
    require_nonnegative(f)?;
    require_nonnegative(p)?;
    let excess = w.zip_with(f, |a, b| (a - b).max(0.0));

    let base_sum = frac_integral(&w.zip_with(p, |a, b| a + b), mu).map(|x| x * x);
    let b = fit_constant(&excess, &base_sum);
    let rhs = f.zip_with(&base_sum, |fv, base| fv + b * base);
    let r_sum = InequalityReport::from_series(
        "field-by-sum",
        w.clone(),
        rhs,
        vec![("b".into(), b)],
        "w < f + b (J^mu (w+p))^2; b = 0 when w <= f everywhere \
         (boundary case passes with margin 0 under tolerance)",
    );

    let base_sq = frac_integral(&w.map(|x| x * x), mu);
    let b1 = fit_constant(&excess, &base_sq);
    let rhs = f.zip_with(&base_sq, |fv, base| fv + b1 * base);
    let r_sq = InequalityReport::from_series(
        "field-by-square",
        w.clone(),
        rhs,
        vec![("b1".into(), b1)],
        "w < f + b1 J^mu(w^2)",
    );

    let lhs_p = frac_integral(&p.map(|x| x * x), mu);
    let c = fit_constant(&lhs_p, &base_sq);
    let rhs = base_sq.map(|x| 3.0 * x);
    let mut r_p = InequalityReport::from_series(
        "pressure-by-field",
        lhs_p,
        rhs,
        vec![("c".into(), c)],
        "J^mu(p^2) <= c J^mu(w^2), required c <= 3",
    );
    r_p.pass = r_p.pass && c <= 3.0;

    Ok([r_sum, r_sq, r_p])
}

/// The substitution quantities of the Riccati reduction, built by
/// product integration from the norm series of the field and the
/// forcing:
///
/// - `w1 = J^mu(w^2)`,
/// - `w2(t) = k/(1-mu) * int_0^t w(tau)^2 (t-tau)^{1-mu} dtau`,
/// - `z(t) = z0 * exp(-w2(t))`, nonincreasing with `z(0) = z0`,
/// - `F(t) = (2 / reflection) * J^mu(f^2)`.
///
/// The mean-value times `t1`, `t2` are filled in by
/// [`check_key_inequality`].
#[derive(Debug, Clone)]
pub struct RiccatiChain {
    pub mu: FracOrder,
    pub k: f64,
    pub z0: f64,
    /// Squared field norm series; kept so `z` can be evaluated between
    /// nodes during the mean-value bisection.
    pub w_sq: TimeSeries,
    pub w1: TimeSeries,
    pub w2: TimeSeries,
    pub z: TimeSeries,
    pub f_mu: TimeSeries,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub w2_at_t1: Option<f64>,
    pub w2_at_t2: Option<f64>,
}

impl RiccatiChain {
    /// Exponent `w2(t)` at an arbitrary time (partial-cell product
    /// integration), consistent with the nodal series.
    pub fn w2_at(&self, t: f64) -> f64 {
        let mu = self.mu.mu();
        self.k / (1.0 - mu) * power_kernel_integral_at(&self.w_sq, 1.0 - mu, t)
    }

    /// `z(t)` at an arbitrary time.
    pub fn z_at(&self, t: f64) -> f64 {
        self.z0 * (-self.w2_at(t)).exp()
    }
}

/// Reproducible default for the chain strength `k`: twice the sign
/// threshold of the quadratic gap at `s = (1-mu)/2` (the midpoint of the
/// admissible Mellin strip), so the "large k" side of the gap condition
/// holds with an explicit rule.
pub fn default_chain_strength(b1: f64, mu: FracOrder) -> Result<f64, Error> {
    Ok(2.0 * beta_gap_threshold(b1, 0.5 * (1.0 - mu.mu()), mu)?)
}

/// Forcing majorant realizing the chain premise. The integral
/// inequality verified by [`check_key_inequality`] is conditional on
/// the normalized transform of the forcing dominating the Riccati
/// exponent, which the scaling step of the reduction guarantees by
/// replacing the forcing with a majorant of the field. Concretely this
/// returns `m` with `(2/Gamma) m^2 = (1+headroom)^2 w^2`, the smallest
/// such majorant inflated by the given relative headroom (which absorbs
/// quadrature error in the exponent comparison).
pub fn chain_forcing_majorant(w: &TimeSeries, mu: FracOrder, headroom: f64) -> TimeSeries {
    let factor = (0.5 * reflection_constant(mu)).sqrt() * (1.0 + headroom);
    w.map(|v| factor * v)
}

pub fn build_riccati_chain(
    w: &TimeSeries,
    f: &TimeSeries,
    mu: FracOrder,
    k: f64,
    z0: f64,
) -> Result<RiccatiChain, Error> {
    let mu = FracOrder::solver_range(mu.mu())?;
    if w.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    require_nonnegative(w)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Config(format!("chain strength k must be positive, got {k}")));
    }
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::Config(format!("z(0) must be positive, got {z0}")));
    }
    let w_sq = w.map(|x| x * x);
    let w1 = frac_integral(&w_sq, mu);
    let w2 = power_kernel_integral(&w_sq, 1.0 - mu.mu()).map(|v| k / (1.0 - mu.mu()) * v);
    let z = w2.map(|v| z0 * (-v).exp());
    let f_mu = f_mu_transform(&f.map(|x| x * x), mu)?;
    // kernel positivity makes the discrete smoothing integral
    // nondecreasing for nonnegative data, so this holds exactly
    assert!(
        z.values().windows(2).all(|p| p[1] <= p[0]),
        "z must be nonincreasing"
    );
    assert_eq!(z.values()[0], z0);
    Ok(RiccatiChain {
        mu,
        k,
        z0,
        w_sq,
        w1,
        w2,
        z,
        f_mu,
        t1: None,
        t2: None,
        w2_at_t1: None,
        w2_at_t2: None,
    })
}

/// Bisection for `z(t) = target` on `[lo, hi]`, valid because `z` is
/// continuous and nonincreasing. Returns the located time; the caller
/// checks the residual. When `z` is flat at the target across the whole
/// bracket the midpoint is returned.
fn bisect_mean_value(chain: &RiccatiChain, lo: f64, hi: f64, target: f64) -> f64 {
    let scale = chain.z0;
    if (chain.z_at(lo) - target).abs() <= 1e-13 * scale
        && (chain.z_at(hi) - target).abs() <= 1e-13 * scale
    {
        return 0.5 * (lo + hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if chain.z_at(mid) >= target {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    // pick the endpoint with the smaller residual
    if (chain.z_at(a) - target).abs() <= (chain.z_at(b) - target).abs() {
        a
    } else {
        b
    }
}

/// The key integral inequality of the chain,
///
/// ```text
/// z(0) * t  <  (int_0^t z dtau) * exp(k int_0^t F dtau)
/// ```
///
/// verified at every node, together with the mean-value construction:
/// `t1 in (0,T)` with `int_0^T z = z(t1) T` and `t2 in (T,2T)` with
/// `int_T^{2T} z = z(t2) T`, both located by bisection on the monotone
/// `z`; the located times, the exponents `w2(t1)`, `w2(t2)` and both
/// sides of the resulting exponential comparison are recorded in the
/// constants. The chain grid must cover `[0, 2T]` with an even number
/// of steps so the split at `T` lands on a node.
pub fn check_key_inequality(chain: &mut RiccatiChain) -> Result<InequalityReport, Error> {
    let grid = chain.z.grid();
    if grid.steps() % 2 != 0 || grid.steps() < 2 {
        return Err(Error::ChainTooShort);
    }
    let mid = grid.steps() / 2;
    let t_split = grid.time(mid);
    let iz = chain.z.cumulative_trapz();
    let i_f = chain.f_mu.cumulative_trapz();
    let lhs = TimeSeries::from_fn(grid, |t| chain.z0 * t);
    let rhs = iz.zip_with(&i_f, |a, b| a * (chain.k * b).exp());

    let target1 = iz.values()[mid] / t_split;
    let target2 = (iz.values()[grid.steps()] - iz.values()[mid]) / t_split;
    let t1 = bisect_mean_value(chain, 0.0, t_split, target1);
    let t2 = bisect_mean_value(chain, t_split, grid.horizon(), target2);
    let res1 = (chain.z_at(t1) - target1).abs();
    let res2 = (chain.z_at(t2) - target2).abs();
    let located = res1 < 1e-10 * chain.z0 && res2 < 1e-10 * chain.z0;

    let w2_t1 = chain.w2_at(t1);
    let w2_t2 = chain.w2_at(t2);
    chain.t1 = Some(t1);
    chain.t2 = Some(t2);
    chain.w2_at_t1 = Some(w2_t1);
    chain.w2_at_t2 = Some(w2_t2);

    // exponential comparison implied by the mean-value step:
    // e^{w2(t2)} vs (e^{w2(t2)-w2(t1)} + 1) e^{k int_0^T F}
    let exp_lhs = w2_t2.exp();
    let exp_rhs = ((w2_t2 - w2_t1).exp() + 1.0) * (chain.k * i_f.values()[mid]).exp();

    let mut report = InequalityReport::from_series(
        "key-inequality",
        lhs,
        rhs,
        vec![
            ("t1".into(), t1),
            ("t2".into(), t2),
            ("w2_t1".into(), w2_t1),
            ("w2_t2".into(), w2_t2),
            ("exp_lhs".into(), exp_lhs),
            ("exp_rhs".into(), exp_rhs),
            ("bisect_residual".into(), res1.max(res2)),
        ],
        format!(
            "z0 t < (int z) e^(k int F) nodewise; mean-value times by bisection; \
             exponential comparison holds: {}",
            exp_lhs < exp_rhs
        ),
    );
    report.pass = report.pass && located;
    Ok(report)
}

/// A priori energy bound: the running `L2(Q_t)` norm of the auxiliary
/// field stays below `sqrt(2)` times that of the forcing. Zero forcing
/// passes (both sides vanish).
pub fn check_apriori(bundle: &SolutionBundle) -> InequalityReport {
    let running = |s: &TimeSeries| s.map(|v| v * v).cumulative_trapz().map(f64::sqrt);
    let lhs = running(&bundle.w_norm);
    let rhs = running(&bundle.f_norm).map(|v| std::f64::consts::SQRT_2 * v);
    let wq = *lhs.values().last().unwrap();
    let fq = *rhs.values().last().unwrap() / std::f64::consts::SQRT_2;
    let ratio = if fq > 0.0 { wq / fq } else { 0.0 };
    InequalityReport::from_series(
        "apriori",
        lhs,
        rhs,
        vec![
            ("ratio".into(), ratio),
            ("threshold".into(), std::f64::consts::SQRT_2),
        ],
        "||w||_{L2(Q_t)} < sqrt(2) ||f||_{L2(Q_t)} at every node",
    )
}

/// Exact integrating-factor solution of `y' - coefficient * y = forcing`
/// with `y(0) = y0` on the grid: with `C = int coefficient`,
/// `y(t) = e^{C(t)} (y0 + int_0^t e^{-C} forcing)`, all integrals by the
/// trapezoid rule.
pub fn gronwall_bound(
    forcing: &TimeSeries,
    coefficient: &TimeSeries,
    y0: f64,
) -> Result<TimeSeries, Error> {
    if forcing.grid() != coefficient.grid() {
        return Err(Error::GridMismatch);
    }
    require_nonnegative(coefficient)?;
    let c = coefficient.cumulative_trapz();
    let inner = forcing.zip_with(&c, |f, ci| f * (-ci).exp()).cumulative_trapz();
    Ok(c.zip_with(&inner, |ci, acc| ci.exp() * (y0 + acc)))
}

/// Sample counts and resolutions for [`boundedness_harnesses`]. Each
/// harness runs once at the base resolution and once refined (doubled
/// time steps or grid), fitting the empirical operator norm both times.
#[derive(Debug, Clone, Serialize)]
pub struct HarnessConfig {
    /// Random series per fractional-integral (Hardy-Littlewood) run.
    pub hl_samples: usize,
    pub hl_steps: usize,
    /// Random fields per potential (Sobolev) run; the refined run uses
    /// a doubled spatial grid.
    pub sobolev_samples: usize,
    pub sobolev_grid: usize,
    /// Random space-time fields for the heat-potential mixed-norm and
    /// product checks.
    pub field_samples: usize,
    pub field_cutoff: usize,
    pub field_steps: usize,
    pub rho: f64,
    pub seed: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            hl_samples: 500,
            hl_steps: 256,
            sobolev_samples: 20,
            sobolev_grid: 8,
            field_samples: 20,
            field_cutoff: 3,
            field_steps: 24,
            rho: 1.0,
            seed: 0x0ddba11,
        }
    }
}

/// One empirical operator-norm fit with its refinement check.
#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub id: String,
    /// Target Lebesgue exponent of the output space.
    pub exponent: f64,
    pub constant: f64,
    pub refined_constant: f64,
    /// Fitted constant moved by at most 25% under refinement.
    pub stable: bool,
    pub notes: String,
}

impl HarnessReport {
    fn new(id: String, exponent: f64, constant: f64, refined: f64, notes: String) -> Self {
        let stable = constant.is_finite()
            && refined.is_finite()
            && constant > 0.0
            && (refined / constant - 1.0).abs() <= 0.25;
        Self {
            id,
            exponent,
            constant,
            refined_constant: refined,
            stable,
            notes,
        }
    }
}

/// Fractional orders the harnesses sweep; trends over this finite
/// sequence are reported, never a limit claim.
pub const HARNESS_ORDERS: [f64; 4] = [0.625, 0.75, 0.875, 0.9375];

fn hl_constant(mu: FracOrder, q: f64, steps: usize, samples: usize, seed: u64) -> f64 {
    let grid = TimeGrid::new(1.0, steps).expect("valid grid");
    let mut c = 0.0f64;
    for i in 0..samples {
        let u = random_series(grid, seed.wrapping_add(i as u64));
        let denom = u.l2_norm();
        if denom < 1e-12 {
            continue;
        }
        c = c.max(frac_integral(&u, mu).lr_norm(q) / denom);
    }
    c
}

/// Random trigonometric polynomial evaluated at the cell centers of an
/// `m^3` grid; the same seed yields the same continuous function at
/// every resolution, so refinement compares like with like.
fn trig_samples(m: usize, length: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for k1 in 0i64..=2 {
        for k2 in -2i64..=2 {
            for k3 in -2i64..=2 {
                let amp: f64 = rng.gen_range(-1.0..1.0);
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                terms.push(([k1, k2, k3], amp, phase));
            }
        }
    }
    let hx = length / m as f64;
    let omega = std::f64::consts::TAU / length;
    let mut out = Vec::with_capacity(m * m * m);
    for i in 0..m {
        let x = (i as f64 + 0.5) * hx;
        for j in 0..m {
            let y = (j as f64 + 0.5) * hx;
            for l in 0..m {
                let z = (l as f64 + 0.5) * hx;
                let mut v = 0.0;
                for ([k1, k2, k3], amp, phase) in &terms {
                    v += amp
                        * (omega * (*k1 as f64 * x + *k2 as f64 * y + *k3 as f64 * z) + phase)
                            .cos();
                }
                out.push(v);
            }
        }
    }
    out
}

fn grid_lp_norm(samples: &[f64], m: usize, length: f64, p: f64) -> f64 {
    let cell = (length / m as f64).powi(3);
    (samples.iter().map(|v| v.abs().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
}

fn sobolev_constant(m: usize, lambda: f64, q: f64, samples: usize, seed: u64) -> Result<f64, Error> {
    let length = std::f64::consts::TAU;
    let mut c = 0.0f64;
    for i in 0..samples {
        let f = trig_samples(m, length, seed.wrapping_add(1000 + i as u64));
        let u = sobolev_potential(&f, m, length, lambda)?;
        let denom = grid_lp_norm(&f, m, length, 2.0);
        if denom < 1e-12 {
            continue;
        }
        c = c.max(grid_lp_norm(&u, m, length, q) / denom);
    }
    Ok(c)
}

/// Directional convection `(a . grad) b` per time node, dealiased.
fn cross_term(a: &SpaceTimeField, b: &SpaceTimeField) -> SpaceTimeField {
    let domain = a.domain();
    let snaps = a
        .snapshots()
        .iter()
        .zip(b.snapshots())
        .map(|(an, bn)| {
            let mut out = SpectralVectorField::zero(domain);
            for i in 0..3 {
                let mut acc = SpectralField::zero(domain);
                for j in 0..3 {
                    let term = an
                        .component(j)
                        .pointwise_product(&bn.component(i).derivative(j))
                        .expect("same domain");
                    acc = acc.add(&term);
                }
                *out.component_mut(i) = acc;
            }
            out
        })
        .collect();
    SpaceTimeField::new(a.grid(), snaps)
}

fn mixed_norm_constants(cfg: &HarnessConfig, steps: usize) -> (f64, f64) {
    let domain = crate::fields::DomainSpec::cube_2pi(cfg.field_cutoff);
    let grid = TimeGrid::new(1.0, steps).expect("valid grid");
    let hp = HeatParams::new(cfg.rho).expect("valid rho");
    let (mut cv, mut cg) = (0.0f64, 0.0f64);
    for i in 0..cfg.field_samples {
        let g = random_space_time_field(domain, grid, cfg.seed.wrapping_add(2000 + i as u64));
        let denom = g.l2_qt_norm();
        if denom < 1e-12 {
            continue;
        }
        cv = cv.max(mixed_norm(&heat_solve(&g, hp), 12.0, 8.0) / denom);
        let grad: f64 = (0..3)
            .map(|axis| mixed_norm(&grad_green(&g, hp, axis), 12.0 / 5.0, 8.0))
            .sum();
        cg = cg.max(grad / denom);
    }
    (cv, cg)
}

fn product_constant(cfg: &HarnessConfig, mu: FracOrder, steps: usize) -> f64 {
    let domain = crate::fields::DomainSpec::cube_2pi(cfg.field_cutoff);
    let grid = TimeGrid::new(1.0, steps).expect("valid grid");
    let hp = HeatParams::new(cfg.rho).expect("valid rho");
    let mut c = 0.0f64;
    let pairs = cfg.field_samples.div_ceil(2).max(1);
    for i in 0..pairs {
        let g1 = random_space_time_field(domain, grid, cfg.seed.wrapping_add(3000 + i as u64));
        let g2 = random_space_time_field(domain, grid, cfg.seed.wrapping_add(4000 + i as u64));
        let lhs = cross_term(&heat_solve(&g1, hp), &heat_solve(&g2, hp)).scalar_norm_series();
        let j1 = frac_integral(&g1.scalar_norm_series(), mu);
        let j2 = frac_integral(&g2.scalar_norm_series(), mu);
        c = c.max(fit_constant(&lhs, &j1.zip_with(&j2, |a, b| a * b)));
    }
    c
}

/// Empirical operator-norm harnesses: the fractional integral
/// `J^mu: L2 -> Lq` with `q = p/(1 - p(1-mu))`, the Riesz-type
/// potential `L2 -> L12` at `lambda = 5/4`, the heat-potential mixed
/// norms `L_{12,8}` / `L_{12/5,8}`, and the product estimate
/// `||Gg1 . grad Gg2||_{L2}(t) <= c J^mu(g1) J^mu(g2)`. Each constant
/// is fitted at the base resolution and again refined; the report
/// carries a stability flag (within 25%).
pub fn boundedness_harnesses(cfg: &HarnessConfig) -> Result<Vec<HarnessReport>, Error> {
    if cfg.hl_samples == 0 || cfg.sobolev_samples == 0 || cfg.field_samples == 0 {
        return Err(Error::Config("harness sample counts must be positive".into()));
    }
    if cfg.hl_steps < 2 || cfg.field_steps < 2 || cfg.sobolev_grid < 2 {
        return Err(Error::Config("harness resolutions too coarse".into()));
    }
    let mut reports = Vec::new();

    for &m in &HARNESS_ORDERS {
        let mu = FracOrder::new(m)?;
        let q = hl_exponent(2.0, mu)?;
        let c = hl_constant(mu, q, cfg.hl_steps, cfg.hl_samples, cfg.seed);
        let cr = hl_constant(mu, q, 2 * cfg.hl_steps, cfg.hl_samples, cfg.seed);
        reports.push(HarnessReport::new(
            format!("frac-integral mu={m}"),
            q,
            c,
            cr,
            format!("J^mu: L2 -> L{q} over {} random series", cfg.hl_samples),
        ));
    }

    let lambda = 1.25;
    let q = 3.0 * 2.0 / (3.0 - 2.0 * lambda);
    let c = sobolev_constant(cfg.sobolev_grid, lambda, q, cfg.sobolev_samples, cfg.seed)?;
    let cr = sobolev_constant(2 * cfg.sobolev_grid, lambda, q, cfg.sobolev_samples, cfg.seed)?;
    reports.push(HarnessReport::new(
        format!("potential lambda={lambda}"),
        q,
        c,
        cr,
        format!(
            "Riesz-type potential: L2 -> L{q} over {} random fields at {}^3 / {}^3",
            cfg.sobolev_samples,
            cfg.sobolev_grid,
            2 * cfg.sobolev_grid
        ),
    ));

    let (cv, cg) = mixed_norm_constants(cfg, cfg.field_steps);
    let (cvr, cgr) = mixed_norm_constants(cfg, 2 * cfg.field_steps);
    reports.push(HarnessReport::new(
        "heat-potential mixed-norm".into(),
        12.0,
        cv,
        cvr,
        "||Gg||_{L_{12,8}} <= c ||g||_{L2(Qt)}".into(),
    ));
    reports.push(HarnessReport::new(
        "heat-potential gradient mixed-norm".into(),
        2.4,
        cg,
        cgr,
        "||grad Gg||_{L_{12/5,8}} <= c ||g||_{L2(Qt)}".into(),
    ));

    for &m in &[0.625, 0.75] {
        let mu = FracOrder::new(m)?;
        let c = product_constant(cfg, mu, cfg.field_steps);
        let cr = product_constant(cfg, mu, 2 * cfg.field_steps);
        reports.push(HarnessReport::new(
            format!("heat-potential product mu={m}"),
            2.0,
            c,
            cr,
            "||Gg1 . grad Gg2||_{L2}(t) <= c J^mu(g1) J^mu(g2)".into(),
        ));
    }

    Ok(reports)
}
