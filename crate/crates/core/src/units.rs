//! Physical constants in Gaussian-CGS units.

use crate::error::{Error, Result};

/// Reduced Planck constant, erg·s.
pub const HBAR: f64 = 1.054_571_817e-27;
/// Speed of light, cm/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e10;
/// Fine-structure constant as used for the metastable decay class.
pub const ALPHA: f64 = 1.0 / 137.0;
/// Lorentz-Lorenz local-field prefactor.
pub const LORENTZ_LORENZ: f64 = 4.0 * std::f64::consts::PI / 3.0;

/// Angular frequency (rad/s) of light with the given vacuum wavelength in µm.
pub fn angular_frequency_from_wavelength_um(wavelength_um: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (wavelength_um * 1e-4)
}

/// Transition dipole moment (esu·cm) implied by a spontaneous decay rate.
///
/// `decay_rate` and `omega` are in rad/s. The same expression gives magnetic
/// dipole moments for M1 transitions.
pub fn dipole_from_decay(decay_rate: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidInput(format!(
            "transition angular frequency must be positive, got {omega}"
        )));
    }
    if !(decay_rate >= 0.0) || !decay_rate.is_finite() {
        return Err(Error::InvalidInput(format!(
            "decay rate must be non-negative, got {decay_rate}"
        )));
    }
    Ok((3.0 * decay_rate * HBAR * SPEED_OF_LIGHT.powi(3) / (4.0 * omega.powi(3))).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_decay_gives_zero_moment() {
        assert_eq!(dipole_from_decay(0.0, 3.0e14).unwrap(), 0.0);
    }

    #[test]
    fn quadrupled_rate_doubles_moment() {
        let omega = angular_frequency_from_wavelength_um(5.4);
        let d1 = dipole_from_decay(1e7, omega).unwrap();
        let d4 = dipole_from_decay(4e7, omega).unwrap();
        assert_eq!(d4, 2.0 * d1);
    }

    #[test]
    fn rejects_non_positive_frequency() {
        assert!(matches!(
            dipole_from_decay(1e7, 0.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(dipole_from_decay(1e7, -1.0).is_err());
    }
}
