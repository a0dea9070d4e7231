//! Zigzag (n,0) nanotubes by zone folding of the graphene bands.
//!
//! The circumference `C = n a` runs along graphene y and the translation
//! vector `|T| = sqrt3 a` along x, so the cutting lines are
//! `k = (k_par, 2 pi mu / (n a))` with `mu = -n+1 ..= n` and
//! `|k_par| <= pi/|T|`. These 2n lines cover the graphene Brillouin zone once.

use crate::error::{Error, Result};
use crate::graphene::{Band, KPoint, TBParams};
use crate::roots::golden_section_min;
use std::f64::consts::PI;
use std::ops::RangeInclusive;

/// Coarse grid used to bracket subband extrema before golden-section refinement.
pub const EDGE_SCAN_POINTS: usize = 2048;

/// Metallic iff `n` is a multiple of three.
pub fn is_semiconducting(n: u32) -> bool {
    n % 3 != 0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubbandState {
    pub mu: i32,
    /// nm^-1
    pub k_par: f64,
    pub band: Band,
}

/// Minimum of the direct transition energy on one cutting line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdge {
    pub mu: i32,
    pub k_par: f64,
    /// eV
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZigzagTube {
    n: u32,
    radius: f64,
    cell_length: f64,
    n_subbands: u32,
    params: TBParams,
}

impl ZigzagTube {
    pub fn new(n: u32, params: TBParams) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidChiralIndex(n));
        }
        let a = params.lattice.a();
        Ok(Self {
            n,
            radius: a * n as f64 / (2.0 * PI),
            cell_length: 3f64.sqrt() * a,
            n_subbands: 2 * n,
            params,
        })
    }

    /// Default tight-binding parameters (gamma0 = 2.89 eV, a = 0.246 nm, u = 0).
    pub fn with_defaults(n: u32) -> Result<Self> {
        Self::new(n, TBParams::default())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Tube radius, nm.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `|T|`, nm.
    pub fn cell_length(&self) -> f64 {
        self.cell_length
    }

    pub fn n_subbands(&self) -> u32 {
        self.n_subbands
    }

    pub fn atoms_per_cell(&self) -> u32 {
        4 * self.n
    }

    pub fn params(&self) -> &TBParams {
        &self.params
    }

    pub fn is_semiconducting(&self) -> bool {
        is_semiconducting(self.n)
    }

    pub fn mu_range(&self) -> RangeInclusive<i32> {
        -(self.n as i32) + 1..=self.n as i32
    }

    /// `pi / |T|`, nm^-1.
    pub fn k_max(&self) -> f64 {
        PI / self.cell_length
    }

    /// Transverse momentum of cutting line `mu`, nm^-1.
    pub fn k_perp(&self, mu: i32) -> f64 {
        2.0 * PI * mu as f64 / (self.n as f64 * self.params.lattice.a())
    }

    /// Graphene k-point of the state `(mu, k_par)`.
    pub fn kpoint(&self, mu: i32, k_par: f64) -> KPoint {
        KPoint::new(k_par, self.k_perp(mu))
    }

    pub fn subband_energy(&self, state: SubbandState) -> Result<f64> {
        self.params.band_energy(self.kpoint(state.mu, state.k_par), state.band)
    }

    /// `E_g = E+ - E-` for the direct transition at `(mu, k_par)`, eV.
    pub fn transition_energy(&self, mu: i32, k_par: f64) -> Result<f64> {
        let m = self.params.lattice.structure_factor(self.kpoint(mu, k_par)).norm();
        Ok(self.params.energy_from_magnitude(m, Band::Conduction)?
            - self.params.energy_from_magnitude(m, Band::Valence)?)
    }

    fn gap_or_inf(&self, mu: i32, k: f64) -> f64 {
        self.transition_energy(mu, k).unwrap_or(f64::INFINITY)
    }

    fn scan(&self, mu: i32) -> Vec<(f64, f64)> {
        let km = self.k_max();
        (0..EDGE_SCAN_POINTS)
            .map(|i| {
                let k = -km + 2.0 * km * i as f64 / (EDGE_SCAN_POINTS - 1) as f64;
                (k, self.gap_or_inf(mu, k))
            })
            .collect()
    }

    fn refine(&self, mu: i32, grid: &[(f64, f64)], i: usize, maximise: bool) -> (f64, f64) {
        let lo = grid[i.saturating_sub(1)].0;
        let hi = grid[(i + 1).min(grid.len() - 1)].0;
        let sign = if maximise { -1.0 } else { 1.0 };
        let (k, e) = golden_section_min(|k| sign * self.gap_or_inf(mu, k), lo, hi, 1e-13);
        (k, sign * e)
    }

    /// Lowest transition energy on cutting line `mu` and its location.
    pub fn band_edge(&self, mu: i32) -> BandEdge {
        let grid = self.scan(mu);
        let i = grid
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .expect("non-empty grid");
        let (k_par, energy) = self.refine(mu, &grid, i, false);
        BandEdge { mu, k_par, energy }
    }

    /// One edge per cutting line, sorted by energy.
    pub fn band_edges(&self) -> Vec<BandEdge> {
        let mut edges: Vec<BandEdge> = self.mu_range().map(|mu| self.band_edge(mu)).collect();
        edges.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.mu.cmp(&b.mu)));
        edges
    }

    pub fn bandgap(&self) -> f64 {
        self.band_edges()[0].energy
    }

    /// Distinct band-edge energies (E11, E22, ...) merged within `tol` eV.
    pub fn edge_energies(&self, tol: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for e in self.band_edges() {
            if out.last().map_or(true, |last| e.energy - last > tol) {
                out.push(e.energy);
            }
        }
        out
    }

    /// Interior stationary points (local minima and maxima) of `E_g` on line `mu`.
    pub fn stationary_points(&self, mu: i32) -> Vec<f64> {
        let grid = self.scan(mu);
        let mut out = Vec::new();
        for i in 1..grid.len() - 1 {
            let (l, c, r) = (grid[i - 1].1, grid[i].1, grid[i + 1].1);
            if c <= l && c < r {
                out.push(self.refine(mu, &grid, i, false).0);
            } else if c >= l && c > r {
                out.push(self.refine(mu, &grid, i, true).0);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_of_seven_zero() {
        let t = ZigzagTube::with_defaults(7).unwrap();
        assert!((t.radius() - 0.246 * 7.0 / (2.0 * PI)).abs() < 1e-12);
        assert!((t.radius() - 0.2741).abs() < 1e-4);
        assert!((t.cell_length() - 3f64.sqrt() * 0.246).abs() < 1e-12);
        assert!((t.cell_length() - 0.426).abs() < 1e-3);
        assert_eq!(t.n_subbands(), 14);
        assert_eq!(ZigzagTube::with_defaults(11).unwrap().atoms_per_cell(), 44);
    }

    #[test]
    fn rejects_small_index() {
        assert_eq!(ZigzagTube::with_defaults(1).unwrap_err(), Error::InvalidChiralIndex(1));
    }

    #[test]
    fn metallic_criterion() {
        assert!(is_semiconducting(7));
        assert!(!is_semiconducting(9));
        assert!(is_semiconducting(11));
    }

    #[test]
    fn seven_zero_bandgap() {
        let t = ZigzagTube::with_defaults(7).unwrap();
        assert!((t.bandgap() - 1.43).abs() < 0.01, "gap = {}", t.bandgap());
    }

    #[test]
    fn nine_zero_is_gapless() {
        assert!(ZigzagTube::with_defaults(9).unwrap().bandgap() < 1e-6);
    }

    #[test]
    fn valley_degeneracy() {
        let t = ZigzagTube::with_defaults(8).unwrap();
        for mu in 1..8 {
            for &k in &[-5.0, -1.3, 0.0, 0.7, 4.2] {
                let a = t.transition_energy(mu, k).unwrap();
                let b = t.transition_energy(-mu, k).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn particle_hole_symmetry_at_zero_overlap() {
        let t = ZigzagTube::with_defaults(7).unwrap();
        let ec = t.subband_energy(SubbandState { mu: 3, k_par: 1.1, band: Band::Conduction }).unwrap();
        assert!((t.transition_energy(3, 1.1).unwrap() - 2.0 * ec).abs() < 1e-14);
    }

    #[test]
    fn edges_sorted_and_paired() {
        let t = ZigzagTube::with_defaults(7).unwrap();
        let edges = t.band_edges();
        assert_eq!(edges.len(), 14);
        assert!(edges.windows(2).all(|w| w[0].energy <= w[1].energy));
        for mu in 1..7 {
            assert!((t.band_edge(mu).energy - t.band_edge(-mu).energy).abs() < 1e-10);
        }
    }
}
