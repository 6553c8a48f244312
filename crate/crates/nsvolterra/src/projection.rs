//! Weyl decomposition `L2(Omega)^3 = H2 (+) G2`, the Leray projector, and
//! the pressure-gradient operator.
//!
//! On the periodic box everything is mode-wise: the gradient part of a
//! vector field `v` is `k (k . v_hat) / |k|^2` per wave vector, the
//! solenoidal part is the remainder, and the mean (`k = 0`) momentum goes
//! wholly to the solenoidal part (a constant vector is divergence-free
//! and is not a gradient on the torus).

use crate::fields::{SpaceTimeField, SpectralField, SpectralVectorField};
use num_complex::Complex64;

/// Output of [`weyl_decompose`]: `input = solenoidal + gradient_part`
/// with `gradient_part = grad(potential)` and `potential` zero-mean.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub solenoidal: SpectralVectorField,
    pub gradient_part: SpectralVectorField,
    pub potential: SpectralField,
}

/// Orthogonal splitting of a vector field into a divergence-free part
/// and a gradient part.
pub fn weyl_decompose(v: &SpectralVectorField) -> DecompositionResult {
    let domain = v.domain();
    let mut grad = SpectralVectorField::zero(domain);
    let mut potential = SpectralField::zero(domain);
    for (i, k) in domain.modes() {
        if k == [0, 0, 0] {
            continue;
        }
        let kap = [
            domain.kappa(0, k[0]),
            domain.kappa(1, k[1]),
            domain.kappa(2, k[2]),
        ];
        let ksq = kap[0] * kap[0] + kap[1] * kap[1] + kap[2] * kap[2];
        let kdotv: Complex64 = (0..3)
            .map(|a| kap[a] * v.component(a).coeffs()[i])
            .sum();
        for a in 0..3 {
            grad.component_mut(a).coeffs_mut()[i] = kap[a] * kdotv / ksq;
        }
        // gradient_part = grad(q) means q_hat = (k.v_hat) / (i |k|^2)
        potential.coeffs_mut()[i] = kdotv / (Complex64::new(0.0, 1.0) * ksq);
    }
    DecompositionResult {
        solenoidal: v.sub(&grad),
        gradient_part: grad,
        potential,
    }
}

/// Divergence-free part of `v`.
pub fn leray_project(v: &SpectralVectorField) -> SpectralVectorField {
    weyl_decompose(v).solenoidal
}

/// Pressure gradient induced by one snapshot of the auxiliary field:
/// under `u_t - rho*Lap(u) - grad p = w` with `div u = 0`, taking the
/// divergence gives `Lap p = -div w`, so
/// `grad p = -(gradient part of w)` and `w + grad p` is divergence-free.
pub fn pressure_gradient_snapshot(w: &SpectralVectorField) -> SpectralVectorField {
    weyl_decompose(w).gradient_part.scaled(-1.0)
}

/// [`pressure_gradient_snapshot`] applied at every time node.
pub fn pressure_gradient_from_w(w: &SpaceTimeField) -> SpaceTimeField {
    w.map_snapshots(pressure_gradient_snapshot)
}

/// Zero-mean pressure potential of one snapshot: `p` with
/// `grad p = pressure_gradient_snapshot(w)`, i.e. `p = -InvLap(div w)`.
pub fn pressure_potential(w: &SpectralVectorField) -> SpectralField {
    weyl_decompose(w).potential.scaled(-1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{divergence, gradient, DomainSpec};
    use crate::sampling::random_vector_field;

    #[test]
    fn pure_gradient_input() {
        let domain = DomainSpec::cube_2pi(4);
        // q = sin x1 sin x2 = -1/2 (cos(x1+x2) - cos(x1-x2))
        let q = SpectralField::from_modes(
            domain,
            &[
                ([1, 1, 0], Complex64::new(-0.25, 0.0)),
                ([1, -1, 0], Complex64::new(0.25, 0.0)),
            ],
        );
        let v = gradient(&q);
        let d = weyl_decompose(&v);
        assert!(d.solenoidal.max_coeff_norm() < 1e-14);
        assert!(d.gradient_part.sub(&v).max_coeff_norm() < 1e-14);
        assert!(gradient(&d.potential).sub(&v).max_coeff_norm() < 1e-14);
        // grad p = -v and w + grad p = 0
        let gp = pressure_gradient_snapshot(&v);
        assert!(gp.add(&v).max_coeff_norm() < 1e-14);
    }

    #[test]
    fn divergence_free_input_passes_through() {
        let domain = DomainSpec::cube_2pi(4);
        let mut v = SpectralVectorField::zero(domain);
        *v.component_mut(0) = SpectralField::sin_mode(domain, 1, 1, 1.0);
        let d = weyl_decompose(&v);
        assert!(d.gradient_part.max_coeff_norm() < 1e-14);
        assert!(d.solenoidal.sub(&v).max_coeff_norm() < 1e-14);
        assert!(pressure_gradient_snapshot(&v).max_coeff_norm() < 1e-14);
        assert!(pressure_potential(&v).max_coeff_norm() < 1e-14);
    }

    #[test]
    fn parts_are_orthogonal_and_sum_back() {
        let domain = DomainSpec::cube_2pi(5);
        for seed in 0..20 {
            let v = random_vector_field(domain, seed);
            let d = weyl_decompose(&v);
            let back = d.solenoidal.add(&d.gradient_part);
            assert!(back.sub(&v).max_coeff_norm() < 1e-13);
            let vsq = v.l2_inner(&v);
            assert!(d.solenoidal.l2_inner(&d.gradient_part).abs() < 1e-12 * vsq);
            assert!(divergence(&d.solenoidal).max_coeff_norm() < 1e-13);
            assert!(
                gradient(&d.potential).sub(&d.gradient_part).max_coeff_norm() < 1e-13
            );
        }
    }

    #[test]
    fn idempotent_on_solenoidal_part() {
        let domain = DomainSpec::cube_2pi(4);
        let v = random_vector_field(domain, 9);
        let s = weyl_decompose(&v).solenoidal;
        let again = weyl_decompose(&s);
        assert!(again.gradient_part.max_coeff_norm() < 1e-14);
        assert!(again.solenoidal.sub(&s).max_coeff_norm() < 1e-14);
    }

    #[test]
    fn projector_is_linear() {
        let domain = DomainSpec::cube_2pi(3);
        let a = random_vector_field(domain, 1);
        let b = random_vector_field(domain, 2);
        let combo = a.scaled(0.7).add(&b.scaled(-1.3));
        let lhs = pressure_gradient_snapshot(&combo);
        let rhs = pressure_gradient_snapshot(&a)
            .scaled(0.7)
            .add(&pressure_gradient_snapshot(&b).scaled(-1.3));
        assert!(lhs.sub(&rhs).max_coeff_norm() < 1e-13);
    }

    #[test]
    fn corrected_field_is_divergence_free() {
        let domain = DomainSpec::cube_2pi(4);
        for seed in 100..110 {
            let w = random_vector_field(domain, seed);
            let corrected = w.add(&pressure_gradient_snapshot(&w));
            assert!(divergence(&corrected).max_coeff_norm() < 1e-13);
            assert!(corrected.sub(&leray_project(&w)).max_coeff_norm() < 1e-13);
        }
    }

    #[test]
    fn mean_mode_stays_solenoidal() {
        let domain = DomainSpec::cube_2pi(2);
        let mut v = SpectralVectorField::zero(domain);
        *v.component_mut(1) = SpectralField::constant(domain, 2.5);
        let d = weyl_decompose(&v);
        assert!(d.gradient_part.max_coeff_norm() < 1e-15);
        assert!(d.solenoidal.sub(&v).max_coeff_norm() < 1e-15);
    }

    #[test]
    fn gradient_norm_never_exceeds_input_norm() {
        // the integrated pressure-gradient bound with constant 1
        let domain = DomainSpec::cube_2pi(4);
        for seed in 0..100 {
            let w = random_vector_field(domain, 7000 + seed);
            let gp = pressure_gradient_snapshot(&w);
            let num: f64 = (0..3).map(|i| gp.component(i).l2_norm().powi(2)).sum();
            let den: f64 = (0..3).map(|i| w.component(i).l2_norm().powi(2)).sum();
            assert!(num <= den * (1.0 + 1e-12));
        }
    }
}
