//! Spectral representation of real scalar and vector fields on a periodic
//! box, space-time fields on a uniform time grid, and the norms used
//! throughout the solver and the verification harness.
//!
//! A scalar field is stored as truncated Fourier coefficients `c(k)` for
//! wave vectors `|k_i| <= N`, with the real-field symmetry
//! `c(-k) = conj(c(k))`. Physical samples live on an `M^3` collocation
//! grid. Quadratic products are dealiased exactly: they are evaluated on
//! an internal zero-padded grid large enough that every retained mode of
//! the product is alias-free, then truncated back to the cutoff.

use crate::error::Error;
use crate::fft::{fft3_inplace, next_fast_size};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Periodic box geometry and resolution.
///
/// `cutoff` is the per-axis mode cutoff N (modes `-N..=N` are kept);
/// `grid` is the per-axis collocation size M. `M >= 3N/2` is required;
/// equal-weight collocation quadrature of quadratic quantities (and hence
/// the Parseval identity for `spatial_norm(.., 2)`) is exact once
/// `M >= 2N + 1`, which the default constructor guarantees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    lengths: [f64; 3],
    cutoff: usize,
    grid: usize,
}

impl DomainSpec {
    pub fn new(lengths: [f64; 3], cutoff: usize, grid: usize) -> Result<Self, Error> {
        if cutoff < 1 {
            return Err(Error::InvalidDomain("cutoff N must be >= 1".into()));
        }
        if 2 * grid < 3 * cutoff {
            return Err(Error::InvalidDomain(format!(
                "grid M = {grid} violates M >= 3N/2 with N = {cutoff}"
            )));
        }
        if lengths.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(Error::InvalidDomain("box lengths must be positive".into()));
        }
        Ok(Self {
            lengths,
            cutoff,
            grid,
        })
    }

    /// Cube of edge 2*pi with collocation fine enough for exact quadratic
    /// quadrature (`M = 2N + 2`).
    pub fn cube_2pi(cutoff: usize) -> Self {
        Self::new([2.0 * PI; 3], cutoff, 2 * cutoff + 2).expect("valid default domain")
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Box volume.
    pub fn volume(&self) -> f64 {
        self.lengths[0] * self.lengths[1] * self.lengths[2]
    }

    /// Physical wavenumber of integer mode `k` along `axis`.
    pub fn kappa(&self, axis: usize, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.lengths[axis]
    }

    /// |kappa|^2 of an integer wave vector.
    pub fn kappa_sq(&self, k: [i64; 3]) -> f64 {
        (0..3).map(|a| self.kappa(a, k[a]).powi(2)).sum()
    }

    fn modes_per_axis(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn num_modes(&self) -> usize {
        self.modes_per_axis().pow(3)
    }

    fn index(&self, k: [i64; 3]) -> usize {
        let n = self.cutoff as i64;
        debug_assert!(k.iter().all(|&ki| ki.abs() <= n));
        let nm = self.modes_per_axis();
        ((k[0] + n) as usize * nm + (k[1] + n) as usize) * nm + (k[2] + n) as usize
    }

    /// Iterate all retained wave vectors with their linear index.
    pub fn modes(&self) -> impl Iterator<Item = (usize, [i64; 3])> + '_ {
        let n = self.cutoff as i64;
        let nm = self.modes_per_axis() as i64;
        (0..nm * nm * nm).map(move |i| {
            let k3 = i % nm - n;
            let k2 = (i / nm) % nm - n;
            let k1 = i / (nm * nm) - n;
            (i as usize, [k1, k2, k3])
        })
    }
}

/// Real scalar field stored as truncated Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    domain: DomainSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(domain: DomainSpec) -> Self {
        Self {
            domain,
            coeffs: vec![Complex64::default(); domain.num_modes()],
        }
    }

    /// Build from explicit `(k, c)` pairs; the conjugate mode is set
    /// automatically so the field is real-valued.
    pub fn from_modes(domain: DomainSpec, modes: &[([i64; 3], Complex64)]) -> Self {
        let mut f = Self::zero(domain);
        for &(k, c) in modes {
            f.add_real_mode(k, c);
        }
        f
    }

    /// `sin` mode along one axis: `amp * sin(freq * 2*pi*x/L)`.
    pub fn sin_mode(domain: DomainSpec, axis: usize, freq: i64, amp: f64) -> Self {
        let mut k = [0i64; 3];
        k[axis] = freq;
        Self::from_modes(domain, &[(k, Complex64::new(0.0, -amp / 2.0))])
    }

    pub fn cos_mode(domain: DomainSpec, axis: usize, freq: i64, amp: f64) -> Self {
        let mut k = [0i64; 3];
        k[axis] = freq;
        Self::from_modes(domain, &[(k, Complex64::new(amp / 2.0, 0.0))])
    }

    pub fn constant(domain: DomainSpec, value: f64) -> Self {
        Self::from_modes(domain, &[([0, 0, 0], Complex64::new(value, 0.0))])
    }

    /// Add `c` at `k` and `conj(c)` at `-k` (no-op on the conjugate when
    /// `k = 0`, where only the real part is kept).
    pub fn add_real_mode(&mut self, k: [i64; 3], c: Complex64) {
        if k == [0, 0, 0] {
            self.coeffs[self.domain.index(k)] += Complex64::new(c.re, 0.0);
            return;
        }
        let idx = self.domain.index(k);
        self.coeffs[idx] += c;
        let neg = [-k[0], -k[1], -k[2]];
        let nidx = self.domain.index(neg);
        self.coeffs[nidx] += c.conj();
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[self.domain.index(k)]
    }

    pub fn set_coeff(&mut self, k: [i64; 3], c: Complex64) {
        let idx = self.domain.index(k);
        self.coeffs[idx] = c;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Largest violation of the real-field symmetry `c(-k) = conj(c(k))`.
    pub fn conj_symmetry_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, k) in self.domain.modes() {
            let neg = self.coeff([-k[0], -k[1], -k[2]]);
            worst = worst.max((self.coeffs[i].conj() - neg).norm());
        }
        worst
    }

    /// Physical samples on the `M^3` collocation grid,
    /// index `(ix * M + iy) * M + iz`, node `x_a = i_a * L_a / M`.
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_on(self.domain.grid)
    }

    fn to_physical_on(&self, m: usize) -> Vec<f64> {
        let data = self.to_complex_samples(m);
        data.iter().map(|c| c.re).collect()
    }

    fn to_complex_samples(&self, m: usize) -> Vec<Complex64> {
        let mut data = vec![Complex64::default(); m * m * m];
        for (i, k) in self.domain.modes() {
            let c = self.coeffs[i];
            if c == Complex64::default() {
                continue;
            }
            let s: Vec<usize> = k.iter().map(|&ki| ki.rem_euclid(m as i64) as usize).collect();
            data[(s[0] * m + s[1]) * m + s[2]] += c;
        }
        fft3_inplace(&mut data, m, true);
        data
    }

    /// Inverse of [`to_physical`]: exact for fields within the cutoff
    /// (aliased coefficient pairs, present only when `M < 2N + 1`, are
    /// split evenly).
    pub fn to_spectral(samples: &[f64], domain: DomainSpec) -> Result<Self, Error> {
        let m = domain.grid;
        if samples.len() != m * m * m {
            return Err(Error::SampleCountMismatch {
                expected: m * m * m,
                got: samples.len(),
            });
        }
        let mut data: Vec<Complex64> =
            samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft3_inplace(&mut data, m, false);
        let scale = (m * m * m) as f64;
        let n = domain.cutoff as i64;
        let mi = m as i64;
        let alias_count = |ki: i64| -> f64 { (((n - ki) / mi) + ((n + ki) / mi) + 1) as f64 };
        let mut out = Self::zero(domain);
        for (i, k) in domain.modes() {
            let s: Vec<usize> = k.iter().map(|&ki| ki.rem_euclid(mi) as usize).collect();
            let split = alias_count(k[0]) * alias_count(k[1]) * alias_count(k[2]);
            out.coeffs[i] = data[(s[0] * m + s[1]) * m + s[2]] / (scale * split);
        }
        Ok(out)
    }

    /// Spectral derivative along `axis`: `c(k) -> i * kappa_axis * c(k)`.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < 3, "invalid axis {axis}");
        let mut out = self.clone();
        for (i, k) in self.domain.modes() {
            out.coeffs[i] = Complex64::new(0.0, self.domain.kappa(axis, k[axis])) * self.coeffs[i];
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let mut out = self.clone();
        for (i, k) in self.domain.modes() {
            out.coeffs[i] = -self.domain.kappa_sq(k) * self.coeffs[i];
        }
        out
    }

    /// Dealiased pointwise product. Both fields are transformed to an
    /// internal padded grid (2/3-rule headroom: padded size `>= 3N + 1`),
    /// multiplied, transformed back, and every mode with any `|k_i| > N`
    /// is dropped; the retained modes are alias-free and exact.
    pub fn pointwise_product(&self, other: &Self) -> Result<Self, Error> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        let n = self.domain.cutoff;
        let p = next_fast_size(3 * n + 1);
        let mut a = self.to_complex_samples(p);
        let b = other.to_complex_samples(p);
        for (av, bv) in a.iter_mut().zip(&b) {
            *av *= bv;
        }
        fft3_inplace(&mut a, p, false);
        let scale = (p * p * p) as f64;
        let pi64 = p as i64;
        let mut out = Self::zero(self.domain);
        for (i, k) in self.domain.modes() {
            let s: Vec<usize> = k.iter().map(|&ki| ki.rem_euclid(pi64) as usize).collect();
            out.coeffs[i] = a[(s[0] * p + s[1]) * p + s[2]] / scale;
        }
        Ok(out)
    }

    /// `L2(Omega)` norm via the Parseval identity.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.domain.volume() * sum).sqrt()
    }

    /// `L2(Omega)` inner product via Parseval.
    pub fn l2_inner(&self, other: &Self) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        self.domain.volume() * sum
    }

    /// `L_p(Omega)` norm by equal-weight collocation quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "p must be >= 1");
        let samples = self.to_physical();
        let cell = self.domain.volume() / samples.len() as f64;
        let sum: f64 = samples.iter().map(|v| v.abs().powf(p)).sum();
        (cell * sum).powf(1.0 / p)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= a;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.domain, other.domain);
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.domain, other.domain);
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c -= o;
        }
        out
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Real 3-vector field; the three components share one [`DomainSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    components: [SpectralField; 3],
}

impl SpectralVectorField {
    pub fn new(components: [SpectralField; 3]) -> Self {
        assert!(
            components[1].domain == components[0].domain
                && components[2].domain == components[0].domain,
            "components must share one DomainSpec"
        );
        Self { components }
    }

    pub fn zero(domain: DomainSpec) -> Self {
        Self::new([
            SpectralField::zero(domain),
            SpectralField::zero(domain),
            SpectralField::zero(domain),
        ])
    }

    pub fn domain(&self) -> DomainSpec {
        self.components[0].domain
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut SpectralField {
        &mut self.components[i]
    }

    pub fn components(&self) -> &[SpectralField; 3] {
        &self.components
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self::new([
            f(&self.components[0]),
            f(&self.components[1]),
            f(&self.components[2]),
        ])
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new([
            self.components[0].add(&other.components[0]),
            self.components[1].add(&other.components[1]),
            self.components[2].add(&other.components[2]),
        ])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new([
            self.components[0].sub(&other.components[0]),
            self.components[1].sub(&other.components[1]),
            self.components[2].sub(&other.components[2]),
        ])
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|c| c.scaled(a))
    }

    /// Component-summed `L2(Omega)` norm, the `w(tau)` of the norm series:
    /// `sum_i ||v_i||_{L2}`.
    pub fn scalar_norm(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm()).sum()
    }

    /// Hilbert-space `L2(Omega)^3` inner product.
    pub fn l2_inner(&self, other: &Self) -> f64 {
        (0..3)
            .map(|i| self.components[i].l2_inner(&other.components[i]))
            .sum()
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.max_coeff_norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}

/// `div v = sum_i d v_i / d x_i`.
pub fn divergence(v: &SpectralVectorField) -> SpectralField {
    let mut out = v.component(0).derivative(0);
    out = out.add(&v.component(1).derivative(1));
    out.add(&v.component(2).derivative(2))
}

/// `grad q`.
pub fn gradient(q: &SpectralField) -> SpectralVectorField {
    SpectralVectorField::new([q.derivative(0), q.derivative(1), q.derivative(2)])
}

/// `sum_i (integral |v_i|^p dx)^{1/p}` by equal-weight collocation
/// quadrature; for `p = 2` this agrees with the Parseval sum to round-off
/// whenever `M >= 2N + 1`.
pub fn spatial_norm(v: &SpectralVectorField, p: f64) -> f64 {
    assert!(p >= 1.0, "p must be >= 1");
    v.components().iter().map(|c| c.lp_norm(p)).sum()
}

/// Uniform time grid on `[0, T]` with `steps` cells (`steps + 1` nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self, Error> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidDomain("horizon T must be positive".into()));
        }
        if steps < 1 {
            return Err(Error::InvalidDomain("need at least one time step".into()));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn num_nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn h(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.horizon * i as f64 / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.num_nodes()).map(|i| self.time(i)).collect()
    }
}

/// A time grid plus one vector-field snapshot per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: TimeGrid,
    snapshots: Vec<SpectralVectorField>,
}

impl SpaceTimeField {
    pub fn new(grid: TimeGrid, snapshots: Vec<SpectralVectorField>) -> Self {
        assert_eq!(snapshots.len(), grid.num_nodes(), "need steps + 1 snapshots");
        let d = snapshots[0].domain();
        assert!(snapshots.iter().all(|s| s.domain() == d));
        Self { grid, snapshots }
    }

    pub fn zero(domain: DomainSpec, grid: TimeGrid) -> Self {
        Self::new(
            grid,
            (0..grid.num_nodes())
                .map(|_| SpectralVectorField::zero(domain))
                .collect(),
        )
    }

    pub fn from_fn(
        domain: DomainSpec,
        grid: TimeGrid,
        f: impl Fn(usize, f64) -> SpectralVectorField,
    ) -> Self {
        let _ = domain;
        Self::new(
            grid,
            (0..grid.num_nodes()).map(|i| f(i, grid.time(i))).collect(),
        )
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn domain(&self) -> DomainSpec {
        self.snapshots[0].domain()
    }

    pub fn snapshot(&self, i: usize) -> &SpectralVectorField {
        &self.snapshots[i]
    }

    pub fn snapshot_mut(&mut self, i: usize) -> &mut SpectralVectorField {
        &mut self.snapshots[i]
    }

    pub fn snapshots(&self) -> &[SpectralVectorField] {
        &self.snapshots
    }

    pub fn map_snapshots(&self, f: impl Fn(&SpectralVectorField) -> SpectralVectorField) -> Self {
        Self::new(self.grid, self.snapshots.iter().map(f).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        Self::new(
            self.grid,
            self.snapshots
                .iter()
                .zip(&other.snapshots)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        Self::new(
            self.grid,
            self.snapshots
                .iter()
                .zip(&other.snapshots)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map_snapshots(|s| s.scaled(a))
    }

    /// Component-summed `L2(Omega)` norm per time node.
    pub fn scalar_norm_series(&self) -> TimeSeries {
        TimeSeries::new(
            self.grid,
            self.snapshots.iter().map(|s| s.scalar_norm()).collect(),
        )
        .expect("lengths match")
    }

    /// `|| sum_i ||v(.,t)|| ||_{L2(0,T)}` — the `L2(Q_T)` norm of the
    /// component-summed spatial norm series, by trapezoidal quadrature.
    pub fn l2_qt_norm(&self) -> f64 {
        self.scalar_norm_series().l2_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.snapshots.iter().all(|s| s.is_finite())
    }
}

/// `L_{p,r}(Q_t)` mixed norm of a vector space-time field
/// (component norms are summed, matching the vector-space norm of the
/// function-space definitions): time integral by trapezoidal rule, space
/// integral by collocation quadrature. `r = p` reduces to `L_p(Q_t)`.
pub fn mixed_norm(u: &SpaceTimeField, p: f64, r: f64) -> f64 {
    assert!(p >= 1.0 && r >= 1.0, "p, r must be >= 1");
    let mut total = 0.0;
    for i in 0..3 {
        let series: Vec<f64> = u
            .snapshots()
            .iter()
            .map(|s| s.component(i).lp_norm(p))
            .collect();
        let ts = TimeSeries::new(u.grid(), series).expect("lengths match");
        total += ts.lr_norm(r);
    }
    total
}

/// `W^{2,1}_2(Q_t)` norm: `L2` norms of `u`, `u_t` (central differences
/// in time, one-sided at the ends), `u_x`, and `u_xx` (spectral),
/// combined per component and summed over components.
pub fn norm_w21(u: &SpaceTimeField) -> Result<f64, Error> {
    if u.grid().steps() < 2 {
        return Err(Error::TooFewTimeNodes {
            need: 3,
            got: u.grid().num_nodes(),
        });
    }
    let h = u.grid().h();
    let nn = u.grid().num_nodes();
    let mut total = 0.0;
    for c in 0..3 {
        let sq = |series: Vec<f64>| -> f64 {
            let ts = TimeSeries::new(u.grid(), series).expect("lengths match");
            ts.l2_norm().powi(2)
        };
        let vals: Vec<&SpectralField> =
            u.snapshots().iter().map(|s| s.component(c)).collect();
        let u_sq = sq(vals.iter().map(|f| f.l2_norm()).collect());
        let ut: Vec<f64> = (0..nn)
            .map(|i| {
                let d = if i == 0 {
                    vals[1].sub(vals[0]).scaled(1.0 / h)
                } else if i == nn - 1 {
                    vals[nn - 1].sub(vals[nn - 2]).scaled(1.0 / h)
                } else {
                    vals[i + 1].sub(vals[i - 1]).scaled(0.5 / h)
                };
                d.l2_norm()
            })
            .collect();
        let ut_sq = sq(ut);
        let mut ux_sq = 0.0;
        let mut uxx_sq = 0.0;
        for a in 0..3 {
            ux_sq += sq(vals.iter().map(|f| f.derivative(a).l2_norm()).collect());
            for b in 0..3 {
                uxx_sq += sq(vals
                    .iter()
                    .map(|f| f.derivative(a).derivative(b).l2_norm())
                    .collect());
            }
        }
        total += (u_sq + ut_sq + ux_sq + uxx_sq).sqrt();
    }
    Ok(total)
}

/// Real scalar function sampled on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self, Error> {
        if values.len() != grid.num_nodes() {
            return Err(Error::SampleCountMismatch {
                expected: grid.num_nodes(),
                got: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Parse("non-finite value in time series".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.num_nodes()],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: (0..grid.num_nodes()).map(|i| f(grid.time(i))).collect(),
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "time grid mismatch");
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Cumulative trapezoidal integral, same grid, starts at 0.
    pub fn cumulative_trapz(&self) -> Self {
        let h = self.grid.h();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.values.len());
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        Self {
            grid: self.grid,
            values: out,
        }
    }

    /// Trapezoidal integral over the full grid.
    pub fn trapz(&self) -> f64 {
        *self.cumulative_trapz().values.last().unwrap()
    }

    /// `L_r(0,T)` norm by trapezoidal quadrature of `|v|^r`.
    pub fn lr_norm(&self, r: f64) -> f64 {
        self.map(|v| v.abs().powf(r)).trapz().powf(1.0 / r)
    }

    pub fn l2_norm(&self) -> f64 {
        self.map(|v| v * v).trapz().sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

// ---------------------------------------------------------------------------
// Snapshot file format
// ---------------------------------------------------------------------------

/// Write fields in the snapshot format: a structured-text header block
/// describing the domain, then `kx ky kz component re im`, one
/// coefficient per line. Zero coefficients are written too so the file
/// is self-describing.
pub fn write_snapshot<W: Write>(w: &mut W, fields: &[&SpectralField]) -> Result<(), Error> {
    assert!(!fields.is_empty());
    let d = fields[0].domain();
    assert!(fields.iter().all(|f| f.domain() == d));
    writeln!(w, "[domain]")?;
    writeln!(
        w,
        "lengths = {:.17e} {:.17e} {:.17e}",
        d.lengths()[0],
        d.lengths()[1],
        d.lengths()[2]
    )?;
    writeln!(w, "cutoff = {}", d.cutoff())?;
    writeln!(w, "grid = {}", d.grid())?;
    writeln!(w, "components = {}", fields.len())?;
    writeln!(w, "kx ky kz component re im")?;
    for (ci, f) in fields.iter().enumerate() {
        for (i, k) in d.modes() {
            let c = f.coeffs()[i];
            writeln!(
                w,
                "{} {} {} {} {:.17e} {:.17e}",
                k[0], k[1], k[2], ci, c.re, c.im
            )?;
        }
    }
    Ok(())
}

pub fn write_vector_snapshot<W: Write>(
    w: &mut W,
    v: &SpectralVectorField,
) -> Result<(), Error> {
    write_snapshot(w, &[v.component(0), v.component(1), v.component(2)])
}

/// Read fields written by [`write_snapshot`].
pub fn read_snapshot<R: BufRead>(r: &mut R) -> Result<Vec<SpectralField>, Error> {
    let mut lines = r.lines();
    let bad = |msg: &str| Error::Parse(format!("snapshot: {msg}"));
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    if header.trim() != "[domain]" {
        return Err(bad("expected [domain] header"));
    }
    let mut lengths = None;
    let mut cutoff = None;
    let mut grid = None;
    let mut ncomp = None;
    loop {
        let line = lines.next().ok_or_else(|| bad("truncated header"))??;
        let line = line.trim().to_string();
        if line == "kx ky kz component re im" {
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(&format!("bad header line: {line}")))?;
        let value = value.trim();
        match key.trim() {
            "lengths" => {
                let parts: Vec<f64> = value
                    .split_whitespace()
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| bad(&format!("lengths: {e}")))?;
                if parts.len() != 3 {
                    return Err(bad("lengths needs 3 values"));
                }
                lengths = Some([parts[0], parts[1], parts[2]]);
            }
            "cutoff" => cutoff = Some(value.parse::<usize>().map_err(|e| bad(&e.to_string()))?),
            "grid" => grid = Some(value.parse::<usize>().map_err(|e| bad(&e.to_string()))?),
            "components" => {
                ncomp = Some(value.parse::<usize>().map_err(|e| bad(&e.to_string()))?)
            }
            other => return Err(bad(&format!("unknown header key: {other}"))),
        }
    }
    let domain = DomainSpec::new(
        lengths.ok_or_else(|| bad("missing lengths"))?,
        cutoff.ok_or_else(|| bad("missing cutoff"))?,
        grid.ok_or_else(|| bad("missing grid"))?,
    )?;
    let ncomp = ncomp.ok_or_else(|| bad("missing components"))?;
    let mut fields = vec![SpectralField::zero(domain); ncomp];
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 6 {
            return Err(bad(&format!("bad coefficient line: {t}")));
        }
        let k: [i64; 3] = [
            parts[0].parse().map_err(|_| bad("bad kx"))?,
            parts[1].parse().map_err(|_| bad("bad ky"))?,
            parts[2].parse().map_err(|_| bad("bad kz"))?,
        ];
        let ci: usize = parts[3].parse().map_err(|_| bad("bad component"))?;
        if ci >= ncomp || k.iter().any(|&ki| ki.unsigned_abs() as usize > domain.cutoff()) {
            return Err(bad("coefficient index out of range"));
        }
        let re: f64 = parts[4].parse().map_err(|_| bad("bad re"))?;
        let im: f64 = parts[5].parse().map_err(|_| bad("bad im"))?;
        fields[ci].set_coeff(k, Complex64::new(re, im));
    }
    Ok(fields)
}

pub fn read_vector_snapshot<R: BufRead>(r: &mut R) -> Result<SpectralVectorField, Error> {
    let fields = read_snapshot(r)?;
    if fields.len() != 3 {
        return Err(Error::Parse(format!(
            "snapshot: expected 3 components, got {}",
            fields.len()
        )));
    }
    let mut it = fields.into_iter();
    Ok(SpectralVectorField::new([
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_field(domain: DomainSpec, seed: u64) -> SpectralField {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zero(domain);
        let n = domain.cutoff() as i64;
        for k1 in 0..=n {
            for k2 in -n..=n {
                for k3 in -n..=n {
                    // walk the half-space once so conjugate pairs are set
                    // exactly once
                    if k1 == 0 && (k2 < 0 || (k2 == 0 && k3 < 0)) {
                        continue;
                    }
                    let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    f.add_real_mode([k1, k2, k3], c);
                }
            }
        }
        f
    }

    /// Direct O(M^3 * modes) evaluation of the truncated Fourier sum.
    fn direct_samples(f: &SpectralField) -> Vec<f64> {
        let d = f.domain();
        let m = d.grid();
        let mut out = vec![0.0; m * m * m];
        for ix in 0..m {
            for iy in 0..m {
                for iz in 0..m {
                    let x = [
                        d.lengths()[0] * ix as f64 / m as f64,
                        d.lengths()[1] * iy as f64 / m as f64,
                        d.lengths()[2] * iz as f64 / m as f64,
                    ];
                    let mut v = Complex64::default();
                    for (i, k) in d.modes() {
                        let phase: f64 = (0..3).map(|a| d.kappa(a, k[a]) * x[a]).sum();
                        v += f.coeffs()[i] * Complex64::new(0.0, phase).exp();
                    }
                    out[(ix * m + iy) * m + iz] = v.re;
                }
            }
        }
        out
    }

    #[test]
    fn to_physical_matches_direct_fourier_sum() {
        let domain = DomainSpec::new([2.0 * PI, 4.0, 1.0], 2, 6).unwrap();
        let f = random_field(domain, 7);
        let fast = f.to_physical();
        let slow = direct_samples(&f);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn physical_samples_are_real() {
        let domain = DomainSpec::cube_2pi(3);
        let f = random_field(domain, 3);
        assert!(f.conj_symmetry_error() < 1e-15);
        let data = f.to_complex_samples(domain.grid());
        let max_im = data.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
        assert!(max_im < 1e-11);
    }

    #[test]
    fn spectral_roundtrip_is_exact() {
        let domain = DomainSpec::new([2.0 * PI, 3.0, 5.0], 3, 8).unwrap();
        let f = random_field(domain, 11);
        let back = SpectralField::to_spectral(&f.to_physical(), domain).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_splits_aliased_pairs_at_coarse_grid() {
        // M = 2N collapses the +N and -N planes onto one DFT slot; the
        // pair is recovered evenly, which is exact when the colliding
        // coefficients are equal (i.e. real cos-type modes).
        let domain = DomainSpec::new([2.0 * PI; 3], 4, 8).unwrap();
        let mut f = SpectralField::zero(domain);
        // cos(4 x1): the +-4 pair collides and is equal, so the even
        // split is exact
        f.add_real_mode([4, 0, 0], Complex64::new(0.3, 0.0));
        // a k1-symmetric Nyquist pair off the axis
        f.add_real_mode([4, 1, 0], Complex64::new(0.2, 0.1));
        f.add_real_mode([-4, 1, 0], Complex64::new(0.2, 0.1));
        // and an interior mode, which never aliases
        f.add_real_mode([2, -1, 3], Complex64::new(0.1, -0.2));
        let back = SpectralField::to_spectral(&f.to_physical(), domain).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    /// Direct convolution of truncated coefficient arrays.
    fn convolution_oracle(a: &SpectralField, b: &SpectralField) -> SpectralField {
        let d = a.domain();
        let n = d.cutoff() as i64;
        let mut out = SpectralField::zero(d);
        for (i, k) in d.modes() {
            let mut acc = Complex64::default();
            for (j, p) in d.modes() {
                let q = [k[0] - p[0], k[1] - p[1], k[2] - p[2]];
                if q.iter().all(|&qi| qi.abs() <= n) {
                    acc += a.coeffs()[j] * b.coeff(q);
                }
            }
            out.coeffs_mut()[i] = acc;
        }
        out
    }

    #[test]
    fn pointwise_product_matches_convolution_oracle() {
        let domain = DomainSpec::new([2.0 * PI; 3], 4, 8).unwrap();
        let a = random_field(domain, 21);
        let b = random_field(domain, 22);
        let fast = a.pointwise_product(&b).unwrap();
        let slow = convolution_oracle(&a, &b);
        let denom = slow.max_coeff_norm().max(1.0);
        for (x, y) in fast.coeffs().iter().zip(slow.coeffs()) {
            assert!((x - y).norm() / denom < 1e-12);
        }
    }

    #[test]
    fn product_of_single_modes_lands_on_the_sum_mode() {
        let domain = DomainSpec::cube_2pi(3);
        // sin(x2) * cos(x2) = sin(2 x2) / 2
        let a = SpectralField::sin_mode(domain, 1, 1, 1.0);
        let b = SpectralField::cos_mode(domain, 1, 1, 1.0);
        let prod = a.pointwise_product(&b).unwrap();
        let expect = SpectralField::sin_mode(domain, 1, 2, 0.5);
        assert!(prod.sub(&expect).max_coeff_norm() < 1e-13);
    }

    #[test]
    fn derivative_and_divergence_of_solenoidal_field() {
        let domain = DomainSpec::cube_2pi(4);
        // u = (sin x2, sin x3, sin x1) is divergence-free
        let u = SpectralVectorField::new([
            SpectralField::sin_mode(domain, 1, 1, 1.0),
            SpectralField::sin_mode(domain, 2, 1, 1.0),
            SpectralField::sin_mode(domain, 0, 1, 1.0),
        ]);
        assert!(divergence(&u).max_coeff_norm() < 1e-15);
        // d/dx2 sin(x2) = cos(x2)
        let d = u.component(0).derivative(1);
        let expect = SpectralField::cos_mode(domain, 1, 1, 1.0);
        assert!(d.sub(&expect).max_coeff_norm() < 1e-14);
    }

    #[test]
    fn l2_norm_of_sine_is_sqrt_half_volume() {
        let domain = DomainSpec::cube_2pi(2);
        let f = SpectralField::sin_mode(domain, 0, 1, 3.0);
        // integral of (3 sin)^2 over the box = 9/2 * V
        let expect = (4.5 * domain.volume()).sqrt();
        assert!((f.l2_norm() - expect).abs() < 1e-12);
        assert!((f.lp_norm(2.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn lp_norm_of_constant_field() {
        let domain = DomainSpec::cube_2pi(2);
        let f = SpectralField::constant(domain, -2.0);
        for p in [1.0, 2.0, 4.0] {
            let expect = 2.0 * domain.volume().powf(1.0 / p);
            assert!((f.lp_norm(p) - expect).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn parseval_matches_quadrature(seed in 0u64..1000) {
            let domain = DomainSpec::cube_2pi(3);
            let f = random_field(domain, seed);
            let parseval = f.l2_norm();
            let quad = f.lp_norm(2.0);
            prop_assert!((parseval - quad).abs() <= 1e-10 * parseval.max(1.0));
        }

        #[test]
        fn product_norms_obey_holder(seed in 0u64..1000) {
            // ||fg||_1 <= ||f||_2 ||g||_2 and ||fg||_2 <= ||f||_4 ||g||_4
            let domain = DomainSpec::new([2.0 * PI; 3], 3, 14).unwrap();
            let f = random_field(domain, seed).scaled(0.3);
            let g = random_field(domain, seed + 5000).scaled(0.3);
            let fg = f.pointwise_product(&g).unwrap();
            prop_assert!(fg.lp_norm(1.0) <= f.lp_norm(2.0) * g.lp_norm(2.0) * (1.0 + 1e-9));
            prop_assert!(fg.lp_norm(2.0) <= f.lp_norm(4.0) * g.lp_norm(4.0) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn mixed_norm_of_separable_field() {
        // u1(x,t) = e^{-t} sin(x1): L_{2,2} norm factorizes.
        let domain = DomainSpec::cube_2pi(2);
        let grid = TimeGrid::new(1.0, 400).unwrap();
        let u = SpaceTimeField::from_fn(domain, grid, |_, t| {
            let mut v = SpectralVectorField::zero(domain);
            *v.component_mut(0) = SpectralField::sin_mode(domain, 0, 1, (-t).exp());
            v
        });
        let space = (0.5 * domain.volume()).sqrt();
        let time = ((1.0 - (-2.0f64).exp()) / 2.0).sqrt();
        let got = mixed_norm(&u, 2.0, 2.0);
        assert!((got - space * time).abs() < 1e-5 * space * time);
        // and it agrees with the component-summed L2(Q_T) norm
        assert!((u.l2_qt_norm() - got).abs() < 1e-10);
    }

    #[test]
    fn holder_in_time_and_space_for_mixed_norms() {
        // ||uv||_{L_{p,r}} <= ||u||_{L_{p1,r1}} ||v||_{L_{p2,r2}} with
        // p = p1 p2/(p1+p2), r = r1 r2/(r1+r2); here (4,4)x(4,4)->(2,2).
        let domain = DomainSpec::new([2.0 * PI; 3], 2, 10).unwrap();
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let u = SpaceTimeField::from_fn(domain, grid, |i, t| {
            random_field(domain, 100 + i as u64)
                .scaled(0.2 * (1.0 + t))
                .into_vector_x()
        });
        let v = SpaceTimeField::from_fn(domain, grid, |i, t| {
            random_field(domain, 900 + i as u64)
                .scaled(0.2 * (2.0 - t))
                .into_vector_x()
        });
        let mut uv_snaps = Vec::new();
        for (a, b) in u.snapshots().iter().zip(v.snapshots()) {
            let mut s = SpectralVectorField::zero(domain);
            *s.component_mut(0) = a.component(0).pointwise_product(b.component(0)).unwrap();
            uv_snaps.push(s);
        }
        let uv = SpaceTimeField::new(grid, uv_snaps);
        let lhs = mixed_norm(&uv, 2.0, 2.0);
        let rhs = mixed_norm(&u, 4.0, 4.0) * mixed_norm(&v, 4.0, 4.0);
        assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn w21_norm_of_decaying_sine() {
        // u1 = e^{-t} sin(x1): u_t = -u, u_x1 = cos-counterpart,
        // u_x1x1 = -u, so the norm is (1+1+1+1)^{1/2} * ||u||_{L2(Q)}.
        let domain = DomainSpec::cube_2pi(2);
        let grid = TimeGrid::new(1.0, 800).unwrap();
        let u = SpaceTimeField::from_fn(domain, grid, |_, t| {
            SpectralField::sin_mode(domain, 0, 1, (-t).exp()).into_vector_x()
        });
        let l2 = u.l2_qt_norm();
        let got = norm_w21(&u).unwrap();
        assert!((got - 2.0 * l2).abs() < 1e-4 * l2, "{got} vs {}", 2.0 * l2);
    }

    #[test]
    fn w21_rejects_short_grids() {
        let domain = DomainSpec::cube_2pi(1);
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let u = SpaceTimeField::zero(domain, grid);
        assert!(matches!(
            norm_w21(&u),
            Err(Error::TooFewTimeNodes { .. })
        ));
    }

    #[test]
    fn time_series_quadrature() {
        let grid = TimeGrid::new(2.0, 1000).unwrap();
        let s = TimeSeries::from_fn(grid, |t| t * t);
        assert!((s.trapz() - 8.0 / 3.0).abs() < 1e-5);
        let cum = s.cumulative_trapz();
        assert_eq!(cum.values()[0], 0.0);
        assert!((cum.values()[500] - 1.0 / 3.0).abs() < 1e-6);
        assert!((s.l2_norm() - (32.0f64 / 5.0).sqrt()).abs() < 1e-5);
        assert!((s.linf_norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn snapshot_roundtrip() {
        let domain = DomainSpec::new([2.0 * PI, 3.0, 4.0], 2, 6).unwrap();
        let v = SpectralVectorField::new([
            random_field(domain, 41),
            random_field(domain, 42),
            random_field(domain, 43),
        ]);
        let mut buf = Vec::new();
        write_vector_snapshot(&mut buf, &v).unwrap();
        let back = read_vector_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(back.domain(), domain);
        assert!(back.sub(&v).max_coeff_norm() < 1e-15);
    }

    #[test]
    fn snapshot_rejects_garbage() {
        assert!(read_snapshot(&mut "not a snapshot".as_bytes()).is_err());
        let truncated = "[domain]\nlengths = 1 1 1\n";
        assert!(read_snapshot(&mut truncated.as_bytes()).is_err());
    }

    impl SpectralField {
        fn into_vector_x(self) -> SpectralVectorField {
            let d = self.domain();
            let mut v = SpectralVectorField::zero(d);
            *v.component_mut(0) = self;
            v
        }
    }
}
