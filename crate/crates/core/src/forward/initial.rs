//! Deterministic initial conditions `w_0`, given in the coordinates of the
//! torus they are evaluated on.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::geometry::{Point, TorusDomain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialField {
    Constant { value: f64 },
    /// `1` where the first coordinate is below `L/2`, `0` elsewhere.
    HalfTorus,
    /// `mean + amplitude · cos(2π k x_1 / L)`.
    Cosine { mean: f64, amplitude: f64, wavenumber: i32 },
    /// Alternating bands of `1` and `0` of the given width along `x_1`.
    Stripes { width: f64 },
}

impl InitialField {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialField::Constant { value } if !(0.0..=1.0).contains(&value) => {
                Err(config_err(format!("constant initial value {value} outside [0,1]")))
            }
            InitialField::Cosine { mean, amplitude, .. } if mean - amplitude.abs() < 0.0 || mean + amplitude.abs() > 1.0 => {
                Err(config_err("cosine initial field leaves [0,1]"))
            }
            InitialField::Stripes { width } if !(width > 0.0) => Err(config_err("stripe width must be positive")),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &Point, domain: &TorusDomain) -> f64 {
        let x1 = domain.wrap(x).0[0];
        match *self {
            InitialField::Constant { value } => value,
            InitialField::HalfTorus => {
                if x1 < 0.5 * domain.side() {
                    1.0
                } else {
                    0.0
                }
            }
            InitialField::Cosine {
                mean,
                amplitude,
                wavenumber,
            } => mean + amplitude * (2.0 * std::f64::consts::PI * wavenumber as f64 * x1 / domain.side()).cos(),
            InitialField::Stripes { width } => {
                if (x1 / width).floor() as i64 % 2 == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Cell values on a grid over `domain`, where `domain` is `space_scale`
    /// times smaller than the field's own coordinates.
    pub fn on_grid(&self, state: &super::ForwardState, space_scale: f64) -> Result<Vec<f64>> {
        self.validate()?;
        let own = TorusDomain::new(state.domain().dim(), state.domain().side() * space_scale)?;
        Ok((0..state.len())
            .map(|i| self.eval(&state.cell_center(i).scale(space_scale), &own))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::ForwardState;

    #[test]
    fn half_torus_and_scaling() {
        let dom = TorusDomain::new(1, 20.0).unwrap();
        let state = ForwardState::new(dom, 1.0, 0.0).unwrap();
        // field lives on a torus of side 2
        let w = InitialField::HalfTorus.on_grid(&state, 0.1).unwrap();
        assert_eq!(w.iter().sum::<f64>(), 10.0);
        assert_eq!(w[9], 1.0);
        assert_eq!(w[10], 0.0);
        assert!(InitialField::Cosine { mean: 0.5, amplitude: 0.6, wavenumber: 1 }.validate().is_err());
        let s = InitialField::Stripes { width: 0.5 }.on_grid(&state, 0.1).unwrap();
        assert_eq!(&s[..12], &[1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    }
}
