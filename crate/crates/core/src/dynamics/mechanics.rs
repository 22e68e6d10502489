//! Rigid-body systems written in manipulator form
//!
//! ```text
//! M(q) q'' + h(q, q') = B u
//! ```
//!
//! where `h` collects Coriolis, gravity and viscous damping terms. The state
//! vector interleaves coordinates and velocities: `(q1, q1', q2, q2', ...)`.
//! Each mechanism supplies `M`, its partials in `q`, `h` and its partials;
//! the continuous-time Jacobian then follows from differentiating
//! `q'' = M^-1 (B u - h)`:
//!
//! ```text
//! d q''/d q_k  = M^-1 ( -dh/dq_k  - dM/dq_k q'' )
//! d q''/d q'_k = M^-1 ( -dh/dq'_k )
//! ```

use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub(crate) trait Mechanism<F: Scalar> {
    fn dof(&self) -> usize;
    fn mass_matrix(&self, q: &[F]) -> Matrix<F>;
    /// `dM/dq_k`
    fn mass_matrix_partial(&self, q: &[F], k: usize) -> Matrix<F>;
    fn bias(&self, q: &[F], qd: &[F]) -> Vec<F>;
    /// `(dh/dq, dh/dq')`, each `dof x dof` with `[(i, k)] = dh_i/d(.)_k`.
    fn bias_jacobian(&self, q: &[F], qd: &[F]) -> (Matrix<F>, Matrix<F>);
    /// `B u` for the actuated joints.
    fn generalized_force(&self, u: &[F]) -> Vec<F>;
    /// Kinetic plus potential energy.
    fn energy(&self, q: &[F], qd: &[F]) -> F;
}

fn split<F: Scalar>(s: &[F]) -> (Vec<F>, Vec<F>) {
    let q = s.iter().step_by(2).copied().collect();
    let qd = s.iter().skip(1).step_by(2).copied().collect();
    (q, qd)
}

fn accelerations<F: Scalar, M: Mechanism<F> + ?Sized>(
    mech: &M,
    q: &[F],
    qd: &[F],
    u: &[F],
) -> Option<(Matrix<F>, Vec<F>)> {
    let mass = mech.mass_matrix(q);
    let h = mech.bias(q, qd);
    let rhs: Vec<F> = mech.generalized_force(u).iter().zip(&h).map(|(&f, &b)| f - b).collect();
    let qdd = mass.solve_vec(&rhs)?;
    Some((mass, qdd))
}

pub(crate) fn vector_field<F: Scalar, M: Mechanism<F> + ?Sized>(mech: &M, s: &[F], u: &[F]) -> Option<Vec<F>> {
    let (q, qd) = split(s);
    let (_, qdd) = accelerations(mech, &q, &qd, u)?;
    let mut out = vec![F::zero(); s.len()];
    for i in 0..mech.dof() {
        out[2 * i] = qd[i];
        out[2 * i + 1] = qdd[i];
    }
    Some(out)
}

pub(crate) fn field_jacobian<F: Scalar, M: Mechanism<F> + ?Sized>(mech: &M, s: &[F], u: &[F]) -> Option<Matrix<F>> {
    let dof = mech.dof();
    let (q, qd) = split(s);
    let (mass, qdd) = accelerations(mech, &q, &qd, u)?;
    let (dh_dq, dh_dqd) = mech.bias_jacobian(&q, &qd);

    // Columns of the right-hand sides, one per coordinate and per velocity.
    let mut rhs = Matrix::zeros(dof, 2 * dof);
    for k in 0..dof {
        let dm_qdd = mech.mass_matrix_partial(&q, k).mul_vec(&qdd);
        for i in 0..dof {
            rhs[(i, 2 * k)] = -dh_dq[(i, k)] - dm_qdd[i];
            rhs[(i, 2 * k + 1)] = -dh_dqd[(i, k)];
        }
    }
    let d_qdd = mass.solve(&rhs)?;

    let n = 2 * dof;
    let mut jac = Matrix::zeros(n, n);
    for i in 0..dof {
        jac[(2 * i, 2 * i + 1)] = F::one();
        for c in 0..n {
            jac[(2 * i + 1, c)] = d_qdd[(i, c)];
        }
    }
    Some(jac)
}

pub(crate) fn energy<F: Scalar, M: Mechanism<F> + ?Sized>(mech: &M, s: &[F]) -> F {
    let (q, qd) = split(s);
    mech.energy(&q, &qd)
}

/// Point mass on a massless rod; `theta = 0` hangs down, `theta = pi` is upright.
#[derive(Clone, Debug, PartialEq)]
pub struct Pendulum<F> {
    pub mass: F,
    pub length: F,
    pub gravity: F,
    pub damping: F,
}

impl<F: Scalar> Mechanism<F> for Pendulum<F> {
    fn dof(&self) -> usize {
        1
    }

    fn mass_matrix(&self, _q: &[F]) -> Matrix<F> {
        Matrix::from_diagonal(&[self.mass * self.length * self.length])
    }

    fn mass_matrix_partial(&self, _q: &[F], _k: usize) -> Matrix<F> {
        Matrix::zeros(1, 1)
    }

    fn bias(&self, q: &[F], qd: &[F]) -> Vec<F> {
        vec![self.mass * self.gravity * self.length * q[0].sin() + self.damping * qd[0]]
    }

    fn bias_jacobian(&self, q: &[F], _qd: &[F]) -> (Matrix<F>, Matrix<F>) {
        (
            Matrix::from_diagonal(&[self.mass * self.gravity * self.length * q[0].cos()]),
            Matrix::from_diagonal(&[self.damping]),
        )
    }

    fn generalized_force(&self, u: &[F]) -> Vec<F> {
        vec![u[0]]
    }

    fn energy(&self, q: &[F], qd: &[F]) -> F {
        let ml2 = self.mass * self.length * self.length;
        F::lit(0.5) * ml2 * qd[0] * qd[0] - self.mass * self.gravity * self.length * q[0].cos()
    }
}

/// Cart on a frictionless track with a point-mass pole; coordinates `(x, theta)`,
/// `theta = 0` hangs down. The actuator pushes the cart.
#[derive(Clone, Debug, PartialEq)]
pub struct CartPole<F> {
    pub cart_mass: F,
    pub pole_mass: F,
    pub length: F,
    pub gravity: F,
    pub cart_damping: F,
    pub pole_damping: F,
}

impl<F: Scalar> Mechanism<F> for CartPole<F> {
    fn dof(&self) -> usize {
        2
    }

    fn mass_matrix(&self, q: &[F]) -> Matrix<F> {
        let (mp, l) = (self.pole_mass, self.length);
        let off = mp * l * q[1].cos();
        Matrix::from_rows(&[vec![self.cart_mass + mp, off], vec![off, mp * l * l]])
    }

    fn mass_matrix_partial(&self, q: &[F], k: usize) -> Matrix<F> {
        if k == 0 {
            return Matrix::zeros(2, 2);
        }
        let d = -self.pole_mass * self.length * q[1].sin();
        Matrix::from_rows(&[vec![F::zero(), d], vec![d, F::zero()]])
    }

    fn bias(&self, q: &[F], qd: &[F]) -> Vec<F> {
        let (mp, l, g) = (self.pole_mass, self.length, self.gravity);
        let (s, _) = q[1].sin_cos();
        vec![
            -mp * l * s * qd[1] * qd[1] + self.cart_damping * qd[0],
            mp * g * l * s + self.pole_damping * qd[1],
        ]
    }

    fn bias_jacobian(&self, q: &[F], qd: &[F]) -> (Matrix<F>, Matrix<F>) {
        let (mp, l, g) = (self.pole_mass, self.length, self.gravity);
        let (s, c) = q[1].sin_cos();
        let dq = Matrix::from_rows(&[
            vec![F::zero(), -mp * l * c * qd[1] * qd[1]],
            vec![F::zero(), mp * g * l * c],
        ]);
        let dqd = Matrix::from_rows(&[
            vec![self.cart_damping, -F::lit(2.0) * mp * l * s * qd[1]],
            vec![F::zero(), self.pole_damping],
        ]);
        (dq, dqd)
    }

    fn generalized_force(&self, u: &[F]) -> Vec<F> {
        vec![u[0], F::zero()]
    }

    fn energy(&self, q: &[F], qd: &[F]) -> F {
        let (mc, mp, l, g) = (self.cart_mass, self.pole_mass, self.length, self.gravity);
        let (xd, thd) = (qd[0], qd[1]);
        let half = F::lit(0.5);
        half * (mc + mp) * xd * xd + mp * l * q[1].cos() * xd * thd + half * mp * l * l * thd * thd
            - mp * g * l * q[1].cos()
    }
}

/// Two point masses on massless links. `theta1` is measured from the
/// horizontal (upright at `pi/2`, hanging at `-pi/2`), `theta2` relative to
/// the first link. Only the first joint is actuated.
#[derive(Clone, Debug, PartialEq)]
pub struct DoublePendulum<F> {
    pub mass1: F,
    pub mass2: F,
    pub length1: F,
    pub length2: F,
    pub gravity: F,
    pub damping1: F,
    pub damping2: F,
}

impl<F: Scalar> Mechanism<F> for DoublePendulum<F> {
    fn dof(&self) -> usize {
        2
    }

    fn mass_matrix(&self, q: &[F]) -> Matrix<F> {
        let (m1, m2, l1, l2) = (self.mass1, self.mass2, self.length1, self.length2);
        let c2 = q[1].cos();
        let m11 = m1 * l1 * l1 + m2 * (l1 * l1 + l2 * l2 + F::lit(2.0) * l1 * l2 * c2);
        let m12 = m2 * (l2 * l2 + l1 * l2 * c2);
        Matrix::from_rows(&[vec![m11, m12], vec![m12, m2 * l2 * l2]])
    }

    fn mass_matrix_partial(&self, q: &[F], k: usize) -> Matrix<F> {
        if k == 0 {
            return Matrix::zeros(2, 2);
        }
        let d = -self.mass2 * self.length1 * self.length2 * q[1].sin();
        Matrix::from_rows(&[vec![F::lit(2.0) * d, d], vec![d, F::zero()]])
    }

    fn bias(&self, q: &[F], qd: &[F]) -> Vec<F> {
        let (m1, m2, l1, l2, g) = (self.mass1, self.mass2, self.length1, self.length2, self.gravity);
        let k = m2 * l1 * l2 * q[1].sin();
        let c12 = (q[0] + q[1]).cos();
        let two = F::lit(2.0);
        vec![
            -k * (two * qd[0] * qd[1] + qd[1] * qd[1])
                + (m1 + m2) * g * l1 * q[0].cos()
                + m2 * g * l2 * c12
                + self.damping1 * qd[0],
            k * qd[0] * qd[0] + m2 * g * l2 * c12 + self.damping2 * qd[1],
        ]
    }

    fn bias_jacobian(&self, q: &[F], qd: &[F]) -> (Matrix<F>, Matrix<F>) {
        let (m1, m2, l1, l2, g) = (self.mass1, self.mass2, self.length1, self.length2, self.gravity);
        let (s2, c2) = q[1].sin_cos();
        let s12 = (q[0] + q[1]).sin();
        let two = F::lit(2.0);
        let k = m2 * l1 * l2;
        let grav12 = m2 * g * l2 * s12;
        let dq = Matrix::from_rows(&[
            vec![
                -(m1 + m2) * g * l1 * q[0].sin() - grav12,
                -k * c2 * (two * qd[0] * qd[1] + qd[1] * qd[1]) - grav12,
            ],
            vec![-grav12, k * c2 * qd[0] * qd[0] - grav12],
        ]);
        let dqd = Matrix::from_rows(&[
            vec![-two * k * s2 * qd[1] + self.damping1, -two * k * s2 * (qd[0] + qd[1])],
            vec![two * k * s2 * qd[0], self.damping2],
        ]);
        (dq, dqd)
    }

    fn generalized_force(&self, u: &[F]) -> Vec<F> {
        vec![u[0], F::zero()]
    }

    fn energy(&self, q: &[F], qd: &[F]) -> F {
        let (m1, m2, l1, l2, g) = (self.mass1, self.mass2, self.length1, self.length2, self.gravity);
        let half = F::lit(0.5);
        let w12 = qd[0] + qd[1];
        let kinetic = half * (m1 + m2) * l1 * l1 * qd[0] * qd[0]
            + half * m2 * l2 * l2 * w12 * w12
            + m2 * l1 * l2 * q[1].cos() * qd[0] * w12;
        let potential = (m1 + m2) * g * l1 * q[0].sin() + m2 * g * l2 * (q[0] + q[1]).sin();
        kinetic + potential
    }
}
