//! Physical constants (CODATA 2018, SI) and the unit-conversion layer.
//!
//! Configuration and geometry use eV and nm; the absorption pipeline works
//! in SI. Every crossing between the two goes through the helpers below.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Nearest-neighbour hopping magnitude, eV.
pub const DEFAULT_GAMMA0_EV: f64 = 2.89;
/// Graphene lattice constant, nm.
pub const DEFAULT_LATTICE_A_NM: f64 = 0.246;

/// Highest photon energy the pi-band model is used for, eV.
pub const MAX_PHOTON_ENERGY_EV: f64 = 6.0;

pub const NM: f64 = 1e-9;

#[inline]
pub fn ev_to_joule(e: f64) -> f64 {
    e * ELECTRON_CHARGE
}

#[inline]
pub fn joule_to_ev(e: f64) -> f64 {
    e / ELECTRON_CHARGE
}

/// Angular frequency (rad/s) of a photon with energy `e_ev`.
#[inline]
pub fn ev_to_omega(e_ev: f64) -> f64 {
    ev_to_joule(e_ev) / HBAR
}

#[inline]
pub fn omega_to_ev(omega: f64) -> f64 {
    joule_to_ev(omega * HBAR)
}

/// Vacuum wavelength (nm) of a photon with energy `e_ev`.
#[inline]
pub fn ev_to_wavelength_nm(e_ev: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / ev_to_omega(e_ev) / NM
}

#[inline]
pub fn wavelength_nm_to_omega(lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (lambda_nm * NM)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_edges_match_quoted_wavelengths() {
        // 1.3 eV ~ 953 nm, 2.3 eV ~ 539 nm
        assert!((ev_to_wavelength_nm(1.3) - 953.7).abs() < 0.5);
        assert!((ev_to_wavelength_nm(2.3) - 539.1).abs() < 0.5);
    }

    #[test]
    fn omega_round_trip() {
        let w = wavelength_nm_to_omega(868.0);
        assert!((ev_to_wavelength_nm(omega_to_ev(w)) - 868.0).abs() < 1e-9);
    }
}
