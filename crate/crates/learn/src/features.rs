//! Network inputs built from raw states.

use suple_core::{Scalar, SystemModel};

/// Velocity scale: the reset range of angular rates.
const VELOCITY_SCALE: f64 = 8.0;
const POSITION_SCALE: f64 = 2.0;

/// Observation width for `system`: angles contribute `(cos, sin)`, other
/// coordinates one scaled entry.
pub fn observation_dim<F: Scalar>(system: &SystemModel<F>) -> usize {
    system.angular_mask().iter().map(|&a| if a { 2 } else { 1 }).sum()
}

pub fn observe_into<F: Scalar>(system: &SystemModel<F>, s: &[F], out: &mut Vec<F>) {
    for (i, (&x, &ang)) in s.iter().zip(system.angular_mask()).enumerate() {
        if ang {
            out.push(x.cos());
            out.push(x.sin());
        } else if i % 2 == 1 {
            out.push(x / F::lit(VELOCITY_SCALE));
        } else {
            out.push(x / F::lit(POSITION_SCALE));
        }
    }
}

pub fn observe<F: Scalar>(system: &SystemModel<F>, s: &[F]) -> Vec<F> {
    let mut out = Vec::with_capacity(observation_dim(system));
    observe_into(system, s, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use suple_core::{make_system, Overrides};

    #[test]
    fn pendulum_features() {
        let sys = make_system::<f64>("pendulum", &Overrides::new()).unwrap();
        assert_eq!(observation_dim(&sys), 3);
        let o = observe(&sys, &[0.0, 4.0]);
        assert_eq!(o, vec![1.0, 0.0, 0.5]);
    }
}
