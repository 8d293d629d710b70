//! Mean spin vector and the rotated frame in which it points along z'.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{collective_in, expectation, Axis, CollectiveComponent, OperatorMatrix, Space};
use crate::states::StateVector;
use crate::FRAME_EPS;

/// Largest imaginary part tolerated on an expectation of a hermitian operator.
const IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSpin {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub magnitude: f64,
}

impl MeanSpin {
    pub fn new(jx: f64, jy: f64, jz: f64) -> Self {
        Self { jx, jy, jz, magnitude: (jx * jx + jy * jy + jz * jz).sqrt() }
    }

    /// Length of the projection onto the x-y plane.
    pub fn transverse(&self) -> f64 {
        self.jx.hypot(self.jy)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.jx, self.jy, self.jz]
    }
}

/// `<Jx>, <Jy>, <Jz>` computed in whichever space the state lives in.
pub fn mean_spin(state: &impl StateVector) -> Result<MeanSpin> {
    let n = state.n_atoms();
    let mut out = [0.0; 3];
    for axis in Axis::ALL {
        let value = match state.space() {
            Space::Dicke => expectation(state, &collective_in(Space::Dicke, axis.direction(), n)?)?,
            Space::Full => expectation(state, &CollectiveComponent::axis(n, axis))?,
        };
        if value.im.abs() > IMAG_TOL {
            return Err(Error::Internal(format!(
                "<J{}> has imaginary part {:e}",
                axis.as_char(),
                value.im
            )));
        }
        out[axis.index()] = value.re;
    }
    let m = MeanSpin::new(out[0], out[1], out[2]);
    if m.magnitude > n as f64 / 2.0 + 1e-12 {
        return Err(Error::Internal(format!("|<J>| = {} exceeds N/2", m.magnitude)));
    }
    Ok(m)
}

/// Polar angles of the mean spin, with theta in [0, pi] and phi in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationAngles {
    pub theta: f64,
    pub phi: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
}

fn wrap_phi(phi: f64) -> f64 {
    if phi <= -std::f64::consts::PI {
        phi + 2.0 * std::f64::consts::PI
    } else {
        phi
    }
}

impl RotationAngles {
    /// Build from explicit angles; theta must lie in [0, pi].
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!("theta {theta} must lie in [0, pi]")));
        }
        let (sin_phi, cos_phi) = phi.sin_cos();
        let phi = wrap_phi(sin_phi.atan2(cos_phi));
        Ok(Self { theta, phi, cos_theta: theta.cos(), sin_theta: theta.sin(), cos_phi, sin_phi })
    }

    /// Unit vector of the x' axis.
    pub fn x_prime(&self) -> [f64; 3] {
        [self.cos_theta * self.cos_phi, self.cos_theta * self.sin_phi, -self.sin_theta]
    }

    pub fn y_prime(&self) -> [f64; 3] {
        [-self.sin_phi, self.cos_phi, 0.0]
    }

    pub fn z_prime(&self) -> [f64; 3] {
        [self.sin_theta * self.cos_phi, self.sin_theta * self.sin_phi, self.cos_theta]
    }
}

/// Angles that carry the mean spin onto z'.
///
/// Fails with [`Error::FrameUndefined`] when `|<J>| <= FRAME_EPS`. When the
/// transverse part is below `FRAME_EPS` the azimuth is fixed to zero.
pub fn rotation_angles(m: &MeanSpin) -> Result<RotationAngles> {
    if m.magnitude.is_nan() || m.magnitude <= FRAME_EPS {
        return Err(Error::FrameUndefined { magnitude: m.magnitude });
    }
    let rho = m.transverse();
    let cos_theta = m.jz / m.magnitude;
    let sin_theta = rho / m.magnitude;
    let (cos_phi, sin_phi) = if rho <= FRAME_EPS { (1.0, 0.0) } else { (m.jx / rho, m.jy / rho) };
    Ok(RotationAngles {
        theta: sin_theta.atan2(cos_theta),
        phi: wrap_phi(sin_phi.atan2(cos_phi)),
        cos_theta,
        sin_theta,
        cos_phi,
        sin_phi,
    })
}

/// Dense `(J_x', J_y', J_z')` in the requested space.
pub fn rotated_ops(angles: &RotationAngles, n_atoms: usize, space: Space) -> Result<[OperatorMatrix; 3]> {
    Ok([
        collective_in(space, angles.x_prime(), n_atoms)?,
        collective_in(space, angles.y_prime(), n_atoms)?,
        collective_in(space, angles.z_prime(), n_atoms)?,
    ])
}

/// Matrix-free full-space `(J_x', J_y', J_z')`.
pub fn rotated_components(angles: &RotationAngles, n_atoms: usize) -> [CollectiveComponent; 3] {
    [
        CollectiveComponent::new(n_atoms, angles.x_prime()),
        CollectiveComponent::new(n_atoms, angles.y_prime()),
        CollectiveComponent::new(n_atoms, angles.z_prime()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{collective_op_dicke, total_spin_squared, Observable};
    use crate::states::{ProductState, SymmetricState};
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn mean_spin_examples() {
        let up = mean_spin(&SymmetricState::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(close(up.jx, 0.0) && close(up.jy, 0.0) && close(up.jz, 1.5));

        // 8-dim oracle for the single-excitation state
        let w = SymmetricState::from_real(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        let full = mean_spin(&w.to_full().unwrap()).unwrap();
        assert!(close(full.jx, 0.0) && close(full.jy, 0.0) && close(full.jz, 0.5));
        let dicke = mean_spin(&w).unwrap();
        assert!(close(dicke.jz, 0.5));

        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let plus = ProductState::identical(3, h, h).unwrap().to_full().unwrap();
        let m = mean_spin(&plus).unwrap();
        assert!(close(m.jx, 1.5) && close(m.jy, 0.0) && close(m.jz, 0.0));
    }

    #[test]
    fn angle_examples() {
        let a = rotation_angles(&MeanSpin::new(0.0, 0.0, 1.5)).unwrap();
        assert!(close(a.theta, 0.0) && close(a.phi, 0.0));
        let a = rotation_angles(&MeanSpin::new(1.5, 0.0, 0.0)).unwrap();
        assert!(close(a.theta, FRAC_PI_2) && close(a.phi, 0.0));
        let a = rotation_angles(&MeanSpin::new(0.0, 0.0, -1.0)).unwrap();
        assert!(close(a.theta, PI) && close(a.phi, 0.0));
        let a = rotation_angles(&MeanSpin::new(-1.0, -0.0, 0.0)).unwrap();
        assert!(close(a.phi, PI));
    }

    #[test]
    fn ghz_frame_is_undefined() {
        let ghz = SymmetricState::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let m = mean_spin(&ghz.to_full().unwrap()).unwrap();
        assert!(m.magnitude < 1e-15);
        assert!(matches!(rotation_angles(&m), Err(Error::FrameUndefined { .. })));
        assert!(matches!(
            rotation_angles(&mean_spin(&ghz).unwrap()),
            Err(Error::FrameUndefined { .. })
        ));
    }

    #[test]
    fn identity_and_quarter_turn() {
        let n = 3;
        let id = rotated_ops(&RotationAngles::from_angles(0.0, 0.0).unwrap(), n, Space::Dicke).unwrap();
        for (op, axis) in id.iter().zip(Axis::ALL) {
            assert!(op.max_abs_diff(&collective_op_dicke(axis, n).unwrap()).unwrap() < 1e-15);
        }
        let q = rotated_ops(&RotationAngles::from_angles(FRAC_PI_2, 0.0).unwrap(), n, Space::Dicke).unwrap();
        let jx = collective_op_dicke(Axis::X, n).unwrap();
        let jy = collective_op_dicke(Axis::Y, n).unwrap();
        let jz = collective_op_dicke(Axis::Z, n).unwrap();
        assert!(q[0].max_abs_diff(&jz.scale(Complex64::new(-1.0, 0.0))).unwrap() < 1e-15);
        assert!(q[1].max_abs_diff(&jy).unwrap() < 1e-15);
        assert!(q[2].max_abs_diff(&jx).unwrap() < 1e-15);
    }

    #[test]
    fn primed_means_vanish_for_random_states() {
        for seed in 0..100 {
            let s = SymmetricState::random(4, seed).unwrap();
            let m = mean_spin(&s).unwrap();
            let a = rotation_angles(&m).unwrap();
            let [xp, yp, zp] = rotated_ops(&a, 4, Space::Dicke).unwrap();
            assert!(expectation(&s, &xp).unwrap().norm() <= 1e-10);
            assert!(expectation(&s, &yp).unwrap().norm() <= 1e-10);
            assert!((expectation(&s, &zp).unwrap().re - m.magnitude).abs() <= 1e-10);
            assert!((a.cos_theta.powi(2) + a.sin_theta.powi(2) - 1.0).abs() <= 1e-14);
            assert!((a.cos_phi.powi(2) + a.sin_phi.powi(2) - 1.0).abs() <= 1e-14);
            assert!(a.sin_theta >= 0.0);
        }
    }

    #[test]
    fn rotation_preserves_algebra() {
        let i = Complex64::new(0.0, 1.0);
        for k in 0..20 {
            let theta = (k as f64 * 0.37) % PI;
            let phi = k as f64 * 1.13 - 3.0;
            let a = RotationAngles::from_angles(theta, phi).unwrap();
            for space in [Space::Dicke, Space::Full] {
                let [xp, yp, zp] = rotated_ops(&a, 4, space).unwrap();
                let r = xp.commutator(&yp).unwrap().max_abs_diff(&zp.scale(i)).unwrap();
                assert!(r <= 1e-12);
                let sq = xp.mul(&xp).unwrap().add(&yp.mul(&yp).unwrap()).unwrap().add(&zp.mul(&zp).unwrap()).unwrap();
                assert!(sq.max_abs_diff(&total_spin_squared(space, 4).unwrap()).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn mean_spin_agrees_across_spaces() {
        for seed in 0..20 {
            let s = SymmetricState::random(5, seed).unwrap();
            let a = mean_spin(&s).unwrap();
            let b = mean_spin(&s.to_full().unwrap()).unwrap();
            for (x, y) in a.as_array().iter().zip(b.as_array()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn matrix_free_rotation_matches_dense() {
        let a = RotationAngles::from_angles(1.0, 2.0).unwrap();
        let f = SymmetricState::random(4, 9).unwrap().to_full().unwrap();
        let dense = rotated_ops(&a, 4, Space::Full).unwrap();
        let free = rotated_components(&a, 4);
        for (d, m) in dense.iter().zip(&free) {
            let v = crate::states::StateVector::amplitudes(&f);
            for (x, y) in d.apply(v).iter().zip(m.apply(v)) {
                assert!((x - y).norm() < 1e-14);
            }
        }
    }
}
