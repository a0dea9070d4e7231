//! Nearest-neighbour pi-band tight-binding model of graphene.
//!
//! Orientation: x is the direction that becomes the tube axis of a zigzag
//! nanotube, y the circumferential direction. The A->B bond vectors are
//!
//! ```text
//! q1 = ( a_c,    0  )
//! q2 = (-a_c/2,  a/2)
//! q3 = (-a_c/2, -a/2)
//! ```
//!
//! which makes `|phi|^2 = 1 + 4 cos(kx a sqrt3/2) cos(ky a/2) + 4 cos^2(ky a/2)`.

use crate::constants::{DEFAULT_GAMMA0_EV, DEFAULT_LATTICE_A_NM};
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// |phi| below this is treated as a Dirac point.
pub const DIRAC_TOLERANCE: f64 = 1e-9;

/// Crystal momentum in the graphene plane, nm^-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KPoint {
    pub kx: f64,
    pub ky: f64,
}

impl KPoint {
    pub const fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    fn dot(&self, v: [f64; 2]) -> f64 {
        self.kx * v[0] + self.ky * v[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Valence,
    Conduction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConstants {
    a: f64,
    a_c: f64,
    neighbors: [[f64; 2]; 3],
}

impl LatticeConstants {
    /// Lattice with constant `a` (nm).
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid("a", format!("lattice constant must be positive, got {a}")));
        }
        let a_c = a / 3f64.sqrt();
        Ok(Self {
            a,
            a_c,
            neighbors: [[a_c, 0.0], [-0.5 * a_c, 0.5 * a], [-0.5 * a_c, -0.5 * a]],
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Nearest-neighbour C-C distance, nm.
    pub fn a_c(&self) -> f64 {
        self.a_c
    }

    pub fn neighbor_vectors(&self) -> &[[f64; 2]; 3] {
        &self.neighbors
    }

    /// A Brillouin-zone corner (Dirac point) on the ky axis.
    pub fn k_corner(&self) -> KPoint {
        KPoint::new(0.0, 4.0 * std::f64::consts::PI / (3.0 * self.a))
    }

    /// `phi(k) = sum_q exp(i k.q)`.
    pub fn structure_factor(&self, k: KPoint) -> Complex64 {
        self.neighbors
            .iter()
            .map(|&q| Complex64::from_polar(1.0, k.dot(q)))
            .sum()
    }

    /// Closed-form `|phi(k)|` for this orientation.
    pub fn structure_factor_magnitude(&self, k: KPoint) -> f64 {
        let cx = (k.kx * self.a * 3f64.sqrt() / 2.0).cos();
        let cy = (k.ky * self.a / 2.0).cos();
        (1.0 + 4.0 * cx * cy + 4.0 * cy * cy).max(0.0).sqrt()
    }

    /// `(v^A, v^B)` with `v^A = sum_q e^{ik.q} q` and `v^B = -sum_q e^{-ik.q} q` (nm).
    pub fn neighbor_velocity_sums(&self, k: KPoint) -> ([Complex64; 2], [Complex64; 2]) {
        let mut va = [Complex64::new(0.0, 0.0); 2];
        for &q in &self.neighbors {
            let phase = Complex64::from_polar(1.0, k.dot(q));
            va[0] += phase * q[0];
            va[1] += phase * q[1];
        }
        let vb = [-va[0].conj(), -va[1].conj()];
        (va, vb)
    }
}

impl Default for LatticeConstants {
    fn default() -> Self {
        Self::new(DEFAULT_LATTICE_A_NM).expect("default lattice constant is valid")
    }
}

/// Hopping magnitude `gamma0` (eV) and orbital overlap `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TBParams {
    pub gamma0: f64,
    pub u: f64,
    pub lattice: LatticeConstants,
}

impl Default for TBParams {
    fn default() -> Self {
        Self { gamma0: DEFAULT_GAMMA0_EV, u: 0.0, lattice: LatticeConstants::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCoefficients {
    pub ca: Complex64,
    pub cb: Complex64,
    pub band: Band,
}

impl TBParams {
    pub fn new(gamma0: f64, u: f64, lattice: LatticeConstants) -> Result<Self> {
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(invalid("gamma0", format!("hopping must be positive, got {gamma0}")));
        }
        if !(0.0..1.0 / 3.0).contains(&u) {
            return Err(invalid("u", format!("overlap must lie in [0, 1/3), got {u}")));
        }
        Ok(Self { gamma0, u, lattice })
    }

    /// `E+-(k) = +-gamma0 |phi| / (1 -+ u |phi|)` in eV.
    pub fn band_energy(&self, k: KPoint, band: Band) -> Result<f64> {
        let m = self.lattice.structure_factor(k).norm();
        self.energy_from_magnitude(m, band)
    }

    pub(crate) fn energy_from_magnitude(&self, m: f64, band: Band) -> Result<f64> {
        let (sign, denominator) = match band {
            Band::Conduction => (1.0, 1.0 - self.u * m),
            Band::Valence => (-1.0, 1.0 + self.u * m),
        };
        if denominator <= 0.0 {
            return Err(Error::OverlapSingularity { denominator });
        }
        Ok(sign * self.gamma0 * m / denominator)
    }

    /// Sublattice amplitudes of the band state at `k`.
    ///
    /// `c_B` is built as the conjugate of the `c_A` phase, which is the
    /// square root of `phi*` everywhere except on the branch cut of the
    /// principal root, where it keeps the vector an eigenvector.
    pub fn band_coefficients(&self, k: KPoint, band: Band) -> Result<BandCoefficients> {
        let phi = self.lattice.structure_factor(k);
        let m = phi.norm();
        if m < DIRAC_TOLERANCE {
            return Err(Error::DiracPoint { kx: k.kx, ky: k.ky, magnitude: m });
        }
        let half = Complex64::from_polar(1.0, 0.5 * phi.arg());
        Ok(match band {
            Band::Valence => {
                let x = (2.0 * (1.0 + self.u * m)).sqrt().recip();
                BandCoefficients { ca: half * x, cb: half.conj() * x, band }
            }
            Band::Conduction => {
                let d = 1.0 - self.u * m;
                if d <= 0.0 {
                    return Err(Error::OverlapSingularity { denominator: d });
                }
                let x = (2.0 * d).sqrt().recip();
                BandCoefficients { ca: -half * x, cb: half.conj() * x, band }
            }
        })
    }

    /// Bloch Hamiltonian `[[0, -g phi], [-g phi*, 0]]` (eV).
    pub fn hamiltonian(&self, k: KPoint) -> [[Complex64; 2]; 2] {
        let phi = self.lattice.structure_factor(k);
        let z = Complex64::new(0.0, 0.0);
        [[z, -phi * self.gamma0], [-phi.conj() * self.gamma0, z]]
    }

    /// Overlap matrix `[[1, u phi], [u phi*, 1]]`.
    pub fn overlap(&self, k: KPoint) -> [[Complex64; 2]; 2] {
        let phi = self.lattice.structure_factor(k);
        let one = Complex64::new(1.0, 0.0);
        [[one, phi * self.u], [phi.conj() * self.u, one]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(u: f64) -> TBParams {
        TBParams::new(2.89, u, LatticeConstants::default()).unwrap()
    }

    #[test]
    fn lattice_invariants() {
        let l = LatticeConstants::default();
        assert!((l.a() - 3f64.sqrt() * l.a_c()).abs() <= 1e-12 * l.a());
        let sum = l.neighbor_vectors().iter().fold([0.0, 0.0], |s, q| [s[0] + q[0], s[1] + q[1]]);
        assert!(sum[0].abs() < 1e-15 && sum[1].abs() < 1e-15);
        for q in l.neighbor_vectors() {
            assert!(((q[0] * q[0] + q[1] * q[1]).sqrt() - l.a_c()).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_point_and_dirac_point() {
        let l = LatticeConstants::default();
        let phi = l.structure_factor(KPoint::new(0.0, 0.0));
        assert!((phi - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!(l.structure_factor(l.k_corner()).norm() < 1e-12);
    }

    #[test]
    fn structure_factor_matches_closed_form_at_reference_point() {
        let l = LatticeConstants::default();
        let k = KPoint::new(1.0, 2.0);
        let direct = l.structure_factor(k).norm();
        let closed = l.structure_factor_magnitude(k);
        assert!((direct - closed).abs() < 1e-12 * closed.max(1.0));
    }

    #[test]
    fn band_energies_at_gamma() {
        let p = params(0.0);
        let g = KPoint::new(0.0, 0.0);
        assert!((p.band_energy(g, Band::Conduction).unwrap() - 8.67).abs() < 1e-12);
        assert!((p.band_energy(g, Band::Valence).unwrap() + 8.67).abs() < 1e-12);
        let p = params(0.1);
        let ec = p.band_energy(g, Band::Conduction).unwrap();
        let ev = p.band_energy(g, Band::Valence).unwrap();
        assert!((ec - 3.0 * 2.89 / 0.7).abs() < 1e-12);
        assert!((ev + 3.0 * 2.89 / 1.3).abs() < 1e-12);
    }

    #[test]
    fn dirac_point_energies_vanish() {
        let p = params(0.0);
        let k = p.lattice.k_corner();
        assert!(p.band_energy(k, Band::Conduction).unwrap().abs() < 1e-11);
        assert!(p.band_energy(k, Band::Valence).unwrap().abs() < 1e-11);
    }

    #[test]
    fn overlap_singularity_is_reported() {
        // construct directly to bypass the u < 1/3 guard
        let p = TBParams { gamma0: 2.89, u: 0.34, lattice: LatticeConstants::default() };
        let err = p.band_energy(KPoint::new(0.0, 0.0), Band::Conduction).unwrap_err();
        assert!(matches!(err, Error::OverlapSingularity { .. }));
    }

    #[test]
    fn real_positive_phi_gives_equal_amplitudes() {
        let p = params(0.0);
        let c = p.band_coefficients(KPoint::new(0.0, 0.0), Band::Valence).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c.ca - Complex64::new(r, 0.0)).norm() < 1e-15);
        assert!((c.cb - Complex64::new(r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn coefficients_fail_at_dirac_point() {
        let p = params(0.0);
        let err = p.band_coefficients(p.lattice.k_corner(), Band::Conduction).unwrap_err();
        assert!(matches!(err, Error::DiracPoint { .. }));
    }

    #[test]
    fn velocity_sums_vanish_at_gamma() {
        let (va, vb) = LatticeConstants::default().neighbor_velocity_sums(KPoint::new(0.0, 0.0));
        for v in va.iter().chain(&vb) {
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(TBParams::new(-1.0, 0.0, LatticeConstants::default()).is_err());
        assert!(TBParams::new(2.89, 0.4, LatticeConstants::default()).is_err());
        assert!(LatticeConstants::new(0.0).is_err());
    }
}
