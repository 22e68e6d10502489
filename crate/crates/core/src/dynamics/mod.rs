//! Controlled dynamical systems `s' = f(s, a)`, their analytic Jacobians and
//! a fixed-step integrator with an exact discrete tangent map.

mod mechanics;

pub use mechanics::{CartPole, DoublePendulum, Pendulum};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

/// Point in a system's state space. Angles are radians and are never wrapped
/// by the dynamics.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StateVector<F>(pub Vec<F>);

/// Actuator command. Values outside the system's bounds are clamped by
/// [`SystemModel::clamp_action`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ControlInput<F>(pub Vec<F>);

/// Jacobian of the one-step discrete map.
pub type TangentMatrix<F> = Matrix<F>;

macro_rules! vec_newtype {
    ($name:ident) => {
        impl<F> Deref for $name<F> {
            type Target = [F];
            fn deref(&self) -> &[F] {
                &self.0
            }
        }

        impl<F> DerefMut for $name<F> {
            fn deref_mut(&mut self) -> &mut [F] {
                &mut self.0
            }
        }

        impl<F> From<Vec<F>> for $name<F> {
            fn from(v: Vec<F>) -> Self {
                Self(v)
            }
        }

        impl<F: Clone> From<&[F]> for $name<F> {
            fn from(v: &[F]) -> Self {
                Self(v.to_vec())
            }
        }

        impl<F> $name<F> {
            pub fn into_inner(self) -> Vec<F> {
                self.0
            }
        }
    };
}

vec_newtype!(StateVector);
vec_newtype!(ControlInput);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemKind {
    Pendulum,
    CartPole,
    DoublePendulum,
    Linear,
    Lorenz,
}

impl SystemKind {
    pub const ALL: [SystemKind; 5] = [
        SystemKind::Pendulum,
        SystemKind::CartPole,
        SystemKind::DoublePendulum,
        SystemKind::Linear,
        SystemKind::Lorenz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Pendulum => "pendulum",
            SystemKind::CartPole => "cartpole",
            SystemKind::DoublePendulum => "double_pendulum",
            SystemKind::Linear => "linear",
            SystemKind::Lorenz => "lorenz",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownSystem(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

#[derive(Clone, Debug, PartialEq)]
enum Dynamics<F> {
    Pendulum(Pendulum<F>),
    CartPole(CartPole<F>),
    DoublePendulum(DoublePendulum<F>),
    /// `s' = A s + B a`
    Linear {
        a: Matrix<F>,
        b: Matrix<F>,
    },
    Lorenz {
        sigma: F,
        rho: F,
        beta: F,
    },
}

/// A named controlled dynamical system with its integration settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemModel<F> {
    kind: SystemKind,
    dynamics: Dynamics<F>,
    n: usize,
    m: usize,
    dt: F,
    integrator: Integrator,
    action_low: Vec<F>,
    action_high: Vec<F>,
    goal: StateVector<F>,
    rest: StateVector<F>,
    angular: Vec<bool>,
    params: BTreeMap<String, F>,
}

/// Parameter overrides keyed by name, e.g. `mass -> 0.5`.
pub type Overrides<F> = BTreeMap<String, F>;

fn defaults(kind: SystemKind) -> Vec<(&'static str, f64)> {
    let mut p = match kind {
        SystemKind::Pendulum => vec![
            ("mass", 1.0),
            ("length", 1.0),
            ("gravity", 9.81),
            ("damping", 0.0),
            ("action_limit", 1.0),
        ],
        SystemKind::CartPole => vec![
            ("cart_mass", 1.0),
            ("mass", 1.0),
            ("length", 1.0),
            ("gravity", 9.81),
            ("cart_damping", 0.0),
            ("pole_damping", 0.0),
            ("action_limit", 10.0),
        ],
        SystemKind::DoublePendulum => vec![
            ("mass1", 1.0),
            ("mass2", 1.0),
            ("length1", 1.0),
            ("length2", 1.0),
            ("gravity", 9.81),
            ("damping1", 0.0),
            ("damping2", 0.0),
            ("action_limit", 10.0),
        ],
        SystemKind::Linear => vec![("a11", 0.5), ("a12", 0.0), ("a21", 0.0), ("a22", -1.0)],
        SystemKind::Lorenz => vec![("sigma", 10.0), ("rho", 28.0), ("beta", 8.0 / 3.0)],
    };
    p.push(("dt", 0.01));
    p
}

fn must_be_positive(kind: SystemKind, key: &str) -> bool {
    match kind {
        SystemKind::Linear => key == "dt",
        SystemKind::Lorenz => true,
        _ => !key.contains("damping") && key != "gravity",
    }
}

/// Builds one of the built-in systems with documented defaults, replacing
/// any parameter named in `overrides`.
pub fn make_system<F: Scalar>(name: &str, overrides: &Overrides<F>) -> Result<SystemModel<F>> {
    let kind: SystemKind = name.parse()?;
    let mut params: BTreeMap<String, F> = defaults(kind)
        .into_iter()
        .map(|(k, v)| (k.to_string(), F::lit(v)))
        .collect();
    for (key, &value) in overrides {
        match params.get_mut(key) {
            Some(slot) => *slot = value,
            None => {
                return Err(Error::InvalidParameter {
                    key: key.clone(),
                    reason: format!("not a parameter of {kind}"),
                })
            }
        }
    }
    for (key, &value) in &params {
        if !value.is_finite() {
            return Err(Error::InvalidParameter {
                key: key.clone(),
                reason: "must be finite".into(),
            });
        }
        if must_be_positive(kind, key) && value <= F::zero() {
            return Err(Error::InvalidParameter {
                key: key.clone(),
                reason: format!("must be positive, got {value}"),
            });
        }
        if key.contains("damping") && value < F::zero() {
            return Err(Error::InvalidParameter {
                key: key.clone(),
                reason: format!("must be non-negative, got {value}"),
            });
        }
    }
    let p = |k: &str| params[k];
    let pi = F::PI();
    let half_pi = F::FRAC_PI_2();
    let zero = F::zero();

    let (dynamics, n, m, goal, rest, angular) = match kind {
        SystemKind::Pendulum => (
            Dynamics::Pendulum(Pendulum {
                mass: p("mass"),
                length: p("length"),
                gravity: p("gravity"),
                damping: p("damping"),
            }),
            2,
            1,
            vec![pi, zero],
            vec![zero, zero],
            vec![true, false],
        ),
        SystemKind::CartPole => (
            Dynamics::CartPole(CartPole {
                cart_mass: p("cart_mass"),
                pole_mass: p("mass"),
                length: p("length"),
                gravity: p("gravity"),
                cart_damping: p("cart_damping"),
                pole_damping: p("pole_damping"),
            }),
            4,
            1,
            vec![zero, zero, pi, zero],
            vec![zero; 4],
            vec![false, false, true, false],
        ),
        SystemKind::DoublePendulum => (
            Dynamics::DoublePendulum(DoublePendulum {
                mass1: p("mass1"),
                mass2: p("mass2"),
                length1: p("length1"),
                length2: p("length2"),
                gravity: p("gravity"),
                damping1: p("damping1"),
                damping2: p("damping2"),
            }),
            4,
            1,
            vec![half_pi, zero, zero, zero],
            vec![-half_pi, zero, zero, zero],
            vec![true, false, true, false],
        ),
        SystemKind::Linear => (
            Dynamics::Linear {
                a: Matrix::from_rows(&[vec![p("a11"), p("a12")], vec![p("a21"), p("a22")]]),
                b: Matrix::zeros(2, 0),
            },
            2,
            0,
            vec![zero; 2],
            vec![zero; 2],
            vec![false; 2],
        ),
        SystemKind::Lorenz => (
            Dynamics::Lorenz {
                sigma: p("sigma"),
                rho: p("rho"),
                beta: p("beta"),
            },
            3,
            0,
            vec![zero; 3],
            vec![zero; 3],
            vec![false; 3],
        ),
    };
    let limit = params.get("action_limit").copied().unwrap_or(F::one());
    Ok(SystemModel {
        kind,
        dynamics,
        n,
        m,
        dt: p("dt"),
        integrator: Integrator::Rk4,
        action_low: vec![-limit; m],
        action_high: vec![limit; m],
        goal: StateVector(goal),
        rest: StateVector(rest),
        angular,
        params,
    })
}

impl<F: Scalar> SystemModel<F> {
    /// Linear system `s' = A s + B a` with `a` bounded to `[-1, 1]^m`.
    pub fn linear(a: Matrix<F>, b: Matrix<F>, dt: F) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Dimension {
                what: "linear system matrix columns",
                expected: n,
                got: a.cols(),
            });
        }
        if b.rows() != n {
            return Err(Error::Dimension {
                what: "linear input matrix rows",
                expected: n,
                got: b.rows(),
            });
        }
        if !(dt > F::zero()) {
            return Err(Error::InvalidParameter {
                key: "dt".into(),
                reason: "must be positive".into(),
            });
        }
        let m = b.cols();
        let mut params = BTreeMap::new();
        params.insert("dt".to_string(), dt);
        for i in 0..n {
            for j in 0..n {
                params.insert(format!("a{}{}", i + 1, j + 1), a[(i, j)]);
            }
        }
        Ok(Self {
            kind: SystemKind::Linear,
            dynamics: Dynamics::Linear { a, b },
            n,
            m,
            dt,
            integrator: Integrator::Rk4,
            action_low: vec![-F::one(); m],
            action_high: vec![F::one(); m],
            goal: StateVector(vec![F::zero(); n]),
            rest: StateVector(vec![F::zero(); n]),
            angular: vec![false; n],
            params,
        })
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_dt(mut self, dt: F) -> Result<Self> {
        if !(dt > F::zero()) {
            return Err(Error::InvalidParameter {
                key: "dt".into(),
                reason: "must be positive".into(),
            });
        }
        self.dt = dt;
        self.params.insert("dt".into(), dt);
        Ok(self)
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.as_str()
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn action_dim(&self) -> usize {
        self.m
    }

    pub fn dt(&self) -> F {
        self.dt
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn action_low(&self) -> &[F] {
        &self.action_low
    }

    pub fn action_high(&self) -> &[F] {
        &self.action_high
    }

    /// The unstable upright equilibrium. Only extrinsic rewards and
    /// evaluation look at this.
    pub fn goal(&self) -> &StateVector<F> {
        &self.goal
    }

    /// The stable equilibrium episodes start from.
    pub fn rest_state(&self) -> &StateVector<F> {
        &self.rest
    }

    /// Which coordinates are angles (compared modulo `2 pi`).
    pub fn angular_mask(&self) -> &[bool] {
        &self.angular
    }

    /// Resolved physical parameters, defaults included.
    pub fn params(&self) -> &BTreeMap<String, F> {
        &self.params
    }

    /// Sampling box for random resets: full circle for angles, +-8 rad/s for
    /// angular velocities, +-2 m (or m/s) for cart coordinates.
    pub fn reset_ranges(&self) -> Vec<(F, F)> {
        let lit = F::lit;
        match self.kind {
            SystemKind::Pendulum => vec![(-F::PI(), F::PI()), (lit(-8.0), lit(8.0))],
            SystemKind::CartPole => vec![
                (lit(-2.0), lit(2.0)),
                (lit(-2.0), lit(2.0)),
                (-F::PI(), F::PI()),
                (lit(-8.0), lit(8.0)),
            ],
            SystemKind::DoublePendulum => vec![
                (-F::PI(), F::PI()),
                (lit(-8.0), lit(8.0)),
                (-F::PI(), F::PI()),
                (lit(-8.0), lit(8.0)),
            ],
            SystemKind::Linear | SystemKind::Lorenz => vec![(lit(-1.0), lit(1.0)); self.n],
        }
    }

    pub fn zero_action(&self) -> ControlInput<F> {
        ControlInput(vec![F::zero(); self.m])
    }

    pub fn clamp_action(&self, a: &[F]) -> ControlInput<F> {
        ControlInput(
            a.iter()
                .zip(self.action_low.iter().zip(&self.action_high))
                .map(|(&x, (&lo, &hi))| x.max(lo).min(hi))
                .collect(),
        )
    }

    pub fn check_state(&self, s: &[F]) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::Dimension {
                what: "state",
                expected: self.n,
                got: s.len(),
            });
        }
        if !s.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteState(format!("{s:?}")));
        }
        Ok(())
    }

    fn check_inputs(&self, s: &[F], a: &[F]) -> Result<ControlInput<F>> {
        self.check_state(s)?;
        if a.len() != self.m {
            return Err(Error::Dimension {
                what: "action",
                expected: self.m,
                got: a.len(),
            });
        }
        Ok(self.clamp_action(a))
    }

    /// Continuous-time vector field `ds/dt`.
    pub fn vector_field(&self, s: &[F], a: &[F]) -> Result<Vec<F>> {
        let a = self.check_inputs(s, a)?;
        self.field_unchecked(s, &a)
    }

    /// Analytic continuous-time Jacobian `d(ds/dt)/ds`.
    pub fn field_jacobian(&self, s: &[F], a: &[F]) -> Result<Matrix<F>> {
        let a = self.check_inputs(s, a)?;
        self.field_jacobian_unchecked(s, &a)
    }

    fn singular(&self, s: &[F]) -> Error {
        Error::SingularMassMatrix(format!("{s:?}"))
    }

    fn field_unchecked(&self, s: &[F], a: &[F]) -> Result<Vec<F>> {
        match &self.dynamics {
            Dynamics::Pendulum(p) => mechanics::vector_field(p, s, a),
            Dynamics::CartPole(p) => mechanics::vector_field(p, s, a),
            Dynamics::DoublePendulum(p) => mechanics::vector_field(p, s, a),
            Dynamics::Linear { a: am, b } => {
                let mut out = am.mul_vec(s);
                if b.cols() > 0 {
                    for (o, bu) in out.iter_mut().zip(b.mul_vec(a)) {
                        *o += bu;
                    }
                }
                Some(out)
            }
            &Dynamics::Lorenz { sigma, rho, beta } => {
                let (x, y, z) = (s[0], s[1], s[2]);
                Some(vec![sigma * (y - x), x * (rho - z) - y, x * y - beta * z])
            }
        }
        .ok_or_else(|| self.singular(s))
    }

    fn field_jacobian_unchecked(&self, s: &[F], a: &[F]) -> Result<Matrix<F>> {
        match &self.dynamics {
            Dynamics::Pendulum(p) => mechanics::field_jacobian(p, s, a),
            Dynamics::CartPole(p) => mechanics::field_jacobian(p, s, a),
            Dynamics::DoublePendulum(p) => mechanics::field_jacobian(p, s, a),
            Dynamics::Linear { a: am, .. } => Some(am.clone()),
            &Dynamics::Lorenz { sigma, rho, beta } => {
                let (x, y, z) = (s[0], s[1], s[2]);
                Some(Matrix::from_rows(&[
                    vec![-sigma, sigma, F::zero()],
                    vec![rho - z, -F::one(), -x],
                    vec![y, x, -beta],
                ]))
            }
        }
        .ok_or_else(|| self.singular(s))
    }

    /// Total mechanical energy for the rigid-body systems.
    pub fn energy(&self, s: &[F]) -> Option<F> {
        match &self.dynamics {
            Dynamics::Pendulum(p) => Some(mechanics::energy(p, s)),
            Dynamics::CartPole(p) => Some(mechanics::energy(p, s)),
            Dynamics::DoublePendulum(p) => Some(mechanics::energy(p, s)),
            _ => None,
        }
    }

    /// Advances `s` by one `dt` under the (clamped) action `a`.
    pub fn step(&self, s: &[F], a: &[F]) -> Result<StateVector<F>> {
        let a = self.check_inputs(s, a)?;
        let h = self.dt;
        let next = match self.integrator {
            Integrator::Euler => {
                let k1 = self.field_unchecked(s, &a)?;
                offset(s, h, &k1)
            }
            Integrator::Rk4 => {
                let half = h * F::lit(0.5);
                let k1 = self.field_unchecked(s, &a)?;
                let k2 = self.field_unchecked(&offset(s, half, &k1), &a)?;
                let k3 = self.field_unchecked(&offset(s, half, &k2), &a)?;
                let k4 = self.field_unchecked(&offset(s, h, &k3), &a)?;
                rk4_combine(s, h, &k1, &k2, &k3, &k4)
            }
        };
        Ok(StateVector(next))
    }

    /// Exact Jacobian of [`step`](Self::step) with respect to the state.
    pub fn jacobian(&self, s: &[F], a: &[F]) -> Result<TangentMatrix<F>> {
        self.step_with_tangent(s, a).map(|(_, j)| j)
    }

    /// One step of the state together with the tangent of the discrete map.
    ///
    /// The tangent is the integrator applied to the variational equation
    /// `V' = A(s(t)) V` with `A` evaluated at the same stage states the
    /// state update uses, which makes it the exact derivative of the step.
    pub fn step_with_tangent(&self, s: &[F], a: &[F]) -> Result<(StateVector<F>, TangentMatrix<F>)> {
        let a = self.check_inputs(s, a)?;
        let h = self.dt;
        let eye = Matrix::identity(self.n);
        match self.integrator {
            Integrator::Euler => {
                let k1 = self.field_unchecked(s, &a)?;
                let a1 = self.field_jacobian_unchecked(s, &a)?;
                Ok((StateVector(offset(s, h, &k1)), eye.add(&a1.scaled(h))))
            }
            Integrator::Rk4 => {
                let half = h * F::lit(0.5);
                let k1 = self.field_unchecked(s, &a)?;
                let s2 = offset(s, half, &k1);
                let k2 = self.field_unchecked(&s2, &a)?;
                let s3 = offset(s, half, &k2);
                let k3 = self.field_unchecked(&s3, &a)?;
                let s4 = offset(s, h, &k3);
                let k4 = self.field_unchecked(&s4, &a)?;

                let d1 = self.field_jacobian_unchecked(s, &a)?;
                let d2 = self
                    .field_jacobian_unchecked(&s2, &a)?
                    .mul_mat(&eye.add(&d1.scaled(half)));
                let d3 = self
                    .field_jacobian_unchecked(&s3, &a)?
                    .mul_mat(&eye.add(&d2.scaled(half)));
                let d4 = self.field_jacobian_unchecked(&s4, &a)?.mul_mat(&eye.add(&d3.scaled(h)));
                let two = F::lit(2.0);
                let sum = d1.add(&d2.scaled(two)).add(&d3.scaled(two)).add(&d4);
                let tangent = eye.add(&sum.scaled(h / F::lit(6.0)));
                Ok((StateVector(rk4_combine(s, h, &k1, &k2, &k3, &k4)), tangent))
            }
        }
    }
}

fn offset<F: Scalar>(s: &[F], h: F, k: &[F]) -> Vec<F> {
    s.iter().zip(k).map(|(&x, &d)| x + h * d).collect()
}

fn rk4_combine<F: Scalar>(s: &[F], h: F, k1: &[F], k2: &[F], k3: &[F], k4: &[F]) -> Vec<F> {
    let two = F::lit(2.0);
    let sixth = h / F::lit(6.0);
    (0..s.len())
        .map(|i| s[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sys(name: &str) -> SystemModel<f64> {
        make_system(name, &Overrides::new()).unwrap()
    }

    #[test]
    fn pendulum_defaults() {
        let p = sys("pendulum");
        assert_eq!((p.state_dim(), p.action_dim()), (2, 1));
        assert_eq!(p.action_low(), &[-1.0]);
        assert_eq!(p.action_high(), &[1.0]);
        assert_eq!(&*p.goal().0, &[PI, 0.0]);
        assert_eq!(p.dt(), 0.01);
    }

    #[test]
    fn double_pendulum_goal_is_aligned_upright() {
        let d = sys("double_pendulum");
        assert_eq!(&*d.goal().0, &[PI / 2.0, 0.0, 0.0, 0.0]);
        assert_eq!(&*d.rest_state().0, &[-PI / 2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn pendulum_fixed_points() {
        let p = sys("pendulum");
        assert_eq!(p.step(&[0.0, 0.0], &[0.0]).unwrap().0, vec![0.0, 0.0]);
        let up = p.step(&[PI, 0.0], &[0.0]).unwrap();
        assert!((up[0] - PI).abs() < 1e-12 && up[1].abs() < 1e-12);
    }

    #[test]
    fn pendulum_falls_from_horizontal() {
        let p = sys("pendulum");
        let s = p.step(&[PI / 2.0, 0.0], &[0.0]).unwrap();
        assert!(s[1] < 0.0);
        assert!(s[0] < PI / 2.0);
    }

    #[test]
    fn errors_are_typed() {
        let p = sys("pendulum");
        assert!(matches!(
            p.step(&[f64::NAN, 0.0], &[0.0]),
            Err(Error::NonFiniteState(_))
        ));
        assert!(matches!(p.step(&[0.0], &[0.0]), Err(Error::Dimension { .. })));
        assert!(matches!(p.step(&[0.0, 0.0], &[]), Err(Error::Dimension { .. })));
        assert!(matches!(
            make_system::<f64>("acrobot", &Overrides::new()),
            Err(Error::UnknownSystem(_))
        ));
        let bad = Overrides::from([("mass".to_string(), 0.0)]);
        assert!(matches!(
            make_system("pendulum", &bad),
            Err(Error::InvalidParameter { .. })
        ));
        let bad = Overrides::from([("length1".to_string(), -1.0)]);
        assert!(matches!(
            make_system("double_pendulum", &bad),
            Err(Error::InvalidParameter { .. })
        ));
        let unknown = Overrides::from([("wingspan".to_string(), 1.0)]);
        assert!(matches!(
            make_system("pendulum", &unknown),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn overrides_replace_defaults() {
        let o = Overrides::from([("mass".to_string(), 0.5), ("action_limit".to_string(), 2.0)]);
        let p = make_system("pendulum", &o).unwrap();
        assert_eq!(p.params()["mass"], 0.5);
        assert_eq!(p.params()["length"], 1.0);
        assert_eq!(p.action_high(), &[2.0]);
    }

    #[test]
    fn actions_are_clamped() {
        let p = sys("pendulum");
        assert_eq!(
            p.step(&[0.0, 0.0], &[5.0]).unwrap(),
            p.step(&[0.0, 0.0], &[1.0]).unwrap()
        );
    }

    #[test]
    fn euler_tangent_is_identity_plus_dt_a() {
        let a = Matrix::from_rows(&[vec![0.3, -1.2], vec![2.0, 0.7]]);
        let lin = SystemModel::linear(a.clone(), Matrix::zeros(2, 0), 0.01)
            .unwrap()
            .with_integrator(Integrator::Euler);
        let j = lin.jacobian(&[0.4, -0.1], &[]).unwrap();
        let expected = Matrix::identity(2).add(&a.scaled(0.01));
        assert_eq!(j, expected);
    }

    #[test]
    fn upright_pendulum_linearization_eigenvalues() {
        let p = sys("pendulum");
        let a = p.field_jacobian(&[PI, 0.0], &[0.0]).unwrap();
        // [[0,1],[c,0]] has eigenvalues +-sqrt(c)
        assert_eq!(a[(0, 0)], 0.0);
        assert_eq!(a[(0, 1)], 1.0);
        assert_eq!(a[(1, 1)], 0.0);
        assert!((a[(1, 0)].sqrt() - 9.81f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn f32_instantiation_steps() {
        let p: SystemModel<f32> = make_system("double_pendulum", &Overrides::new()).unwrap();
        let s = p.step(&[-1.0, 0.2, 0.3, -0.1], &[0.5]).unwrap();
        assert!(s.iter().all(|x| x.is_finite()));
    }
}
