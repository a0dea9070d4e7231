//! Per-photon absorption of a nanotube lying along a path in an arbitrary
//! field, without the dipole approximation.
//!
//! The tube enters through the broadened rate density `U(omega)` and the
//! path/field through `int |A_par(s)|^2 ds`. Geometry and energies are taken
//! in nm and eV at the API; everything multiplied together here is SI.

use crate::constants::{ELECTRON_CHARGE, ELECTRON_MASS, HBAR, MAX_PHOTON_ENERGY_EV, NM};
use crate::error::{invalid, Error, Result};
use crate::fiber::{FiberField, FiberSpec, Field, ModeCache, PlaneWave};
use crate::constants::{ev_to_omega, ev_to_wavelength_nm};
use crate::nanotube::ZigzagTube;
use crate::optical_matrix::MatrixElementM;
use crate::path::{NanotubePath, PathKind};
use crate::quadrature::{composite_gauss_legendre, integrate, Tolerance};
use crate::roots::bisect;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

const GL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbsorptionConfig {
    /// Lorentzian half-width, eV.
    pub gamma: f64,
    /// Photons per second. Cancels in every probability.
    pub flux: f64,
    /// Averaging window, eV.
    pub energy_window: [f64; 2],
    /// Relative tolerance of the adaptive k and s integrals.
    pub k_tolerance: f64,
    /// Fourier quadrature nodes per optical wavelength along z.
    pub samples_per_wavelength: usize,
    /// Lower bound on Fourier quadrature nodes.
    pub min_samples: usize,
    /// Points of the uniform energy grid used for averages.
    pub energy_grid: usize,
}

impl Default for AbsorptionConfig {
    fn default() -> Self {
        Self {
            gamma: 0.01,
            flux: 1e6,
            energy_window: [1.3, 2.3],
            k_tolerance: 1e-8,
            samples_per_wavelength: 64,
            min_samples: 1024,
            energy_grid: 256,
        }
    }
}

impl AbsorptionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("absorption.gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !(self.flux > 0.0 && self.flux.is_finite()) {
            return Err(invalid("absorption.flux", format!("must be positive, got {}", self.flux)));
        }
        let [lo, hi] = self.energy_window;
        if !(lo > 0.0 && lo < hi) {
            return Err(invalid("absorption.energy_window", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
        }
        if hi > MAX_PHOTON_ENERGY_EV {
            return Err(Error::EnergyOutOfRange { energy_ev: hi, max_ev: MAX_PHOTON_ENERGY_EV });
        }
        if !(self.k_tolerance > 0.0 && self.k_tolerance <= 1e-3) {
            return Err(invalid("absorption.k_tolerance", format!("must be in (0, 1e-3], got {}", self.k_tolerance)));
        }
        if self.samples_per_wavelength < 8 {
            return Err(invalid("absorption.samples_per_wavelength", "must be at least 8"));
        }
        if self.min_samples < 64 {
            return Err(invalid("absorption.min_samples", "must be at least 64"));
        }
        if self.energy_grid < 2 {
            return Err(invalid("absorption.energy_grid", "must be at least 2"));
        }
        Ok(())
    }

    /// Uniform grid over the window, endpoints included.
    pub fn energies(&self) -> Vec<f64> {
        uniform_grid(self.energy_window[0], self.energy_window[1], self.energy_grid)
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance::relative(self.k_tolerance)
    }
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Trapezoid average of samples on a uniform grid.
pub fn trapezoid_mean(values: &[f64]) -> f64 {
    match values.len() {
        0 => f64::NAN,
        1 => values[0],
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            (inner + 0.5 * (values[0] + values[n - 1])) / (n - 1) as f64
        }
    }
}

/// Broadened transition-rate density, SI (s C^2 kg^-2 m^-3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralDensityU {
    pub value: f64,
    /// rad/s
    pub omega0: f64,
}

/// Band-structure data of one tube reused across photon energies.
#[derive(Debug, Clone)]
pub struct TubeSpectrum {
    tube: ZigzagTube,
    m: f64,
    // per cutting line: interval ends plus interior extrema of E_g, sorted
    lines: Vec<(i32, Vec<f64>)>,
}

impl TubeSpectrum {
    pub fn new(tube: &ZigzagTube) -> Result<Self> {
        if !tube.is_semiconducting() {
            return Err(Error::MetallicTube(tube.n()));
        }
        let km = tube.k_max();
        let lines = tube
            .mu_range()
            .map(|mu| {
                let mut pts = vec![-km, km];
                pts.extend(tube.stationary_points(mu));
                pts.sort_by(f64::total_cmp);
                (mu, pts)
            })
            .collect();
        Ok(Self { tube: tube.clone(), m: MatrixElementM::for_tube(tube).value, lines })
    }

    pub fn tube(&self) -> &ZigzagTube {
        &self.tube
    }

    /// `(E_g [eV], D_z [nm^-1])` on line `mu` at `k`.
    fn gap_and_dz(&self, mu: i32, k: f64) -> (f64, f64) {
        let p = self.tube.params();
        let kp = self.tube.kpoint(mu, k);
        let phi = p.lattice.structure_factor(kp);
        let mag = phi.norm();
        let (va, _) = p.lattice.neighbor_velocity_sums(kp);
        let um = p.u * mag;
        let eg = p.gamma0 * mag * (1.0 / (1.0 - um) + 1.0 / (1.0 + um));
        let a = p.lattice.a();
        let dz = -(self.m * 3f64.sqrt() / a) * (va[0] * phi.conj()).re / (mag * (1.0 - um * um).sqrt());
        (eg, dz)
    }

    /// `sum_mu int dk D_z^2 L(E_g - E)` in nm^-3 eV^-1.
    fn reduced_u(&self, energy_ev: f64, gamma: f64, tol: Tolerance) -> f64 {
        let mut total = 0.0;
        for (mu, pts) in &self.lines {
            let mu = *mu;
            let mut breaks = pts.clone();
            for w in pts.windows(2) {
                let ga = self.gap_and_dz(mu, w[0]).0 - energy_ev;
                let gb = self.gap_and_dz(mu, w[1]).0 - energy_ev;
                if (ga < 0.0) != (gb < 0.0) {
                    breaks.push(bisect(|k| self.gap_and_dz(mu, k).0 - energy_ev, w[0], w[1], 1e-14));
                }
            }
            let f = |k: f64| {
                let (eg, dz) = self.gap_and_dz(mu, k);
                let de = eg - energy_ev;
                dz * dz * gamma / (PI * (de * de + gamma * gamma))
            };
            total += integrate(f, &breaks, tol).value;
        }
        total
    }

    /// Rate density at photon energy `energy_ev` with half-width `gamma` eV.
    pub fn u(&self, energy_ev: f64, gamma: f64, rel_tol: f64) -> Result<SpectralDensityU> {
        check_energy(energy_ev)?;
        let reduced = self.reduced_u(energy_ev, gamma, Tolerance::relative(rel_tol));
        // spin 2; D_z^2 dk: nm^-3 -> m^-3; Lorentzian: eV^-1 -> J^-1
        let si = 2.0 * HBAR * ELECTRON_CHARGE * ELECTRON_CHARGE / (ELECTRON_MASS * ELECTRON_MASS)
            * reduced
            / (NM * NM * NM)
            / ELECTRON_CHARGE;
        Ok(SpectralDensityU { value: si, omega0: ev_to_omega(energy_ev) })
    }
}

fn check_energy(energy_ev: f64) -> Result<()> {
    if energy_ev > MAX_PHOTON_ENERGY_EV {
        return Err(Error::EnergyOutOfRange { energy_ev, max_ev: MAX_PHOTON_ENERGY_EV });
    }
    if !(energy_ev > 0.0) {
        return Err(invalid("energy", format!("must be positive, got {energy_ev}")));
    }
    Ok(())
}

pub fn spectral_density_u(tube: &ZigzagTube, energy_ev: f64, cfg: &AbsorptionConfig) -> Result<SpectralDensityU> {
    TubeSpectrum::new(tube)?.u(energy_ev, cfg.gamma, cfg.k_tolerance)
}

/// `A+ . t` at arc length `s`, V s / m.
pub fn parallel_potential(path: &NanotubePath, field: &dyn Field, s: f64) -> Complex64 {
    let x = path.sample(s);
    let a = field.potential(x.position);
    a[0] * x.tangent[0] + a[1] * x.tangent[1] + a[2] * x.tangent[2]
}

/// `int |A_par|^2 ds` over the whole path, (V s / m)^2 m.
pub fn intensity_integral(path: &NanotubePath, field: &dyn Field, cfg: &AbsorptionConfig) -> f64 {
    let (lo, hi) = path.s_range();
    let f = |s: f64| parallel_potential(path, field, s).norm_sqr();
    let mut tol = cfg.tolerance();
    tol.abs = 1e-300;
    integrate(f, &[lo, 0.0, hi], tol).value * NM
}

/// Number of field phase cycles along the path.
fn field_cycles(path: &NanotubePath, field: &dyn Field) -> f64 {
    let axial = field.axial_wavenumber().abs() * path.z_extent();
    let azimuthal = match path.kind() {
        PathKind::Straight { .. } => PI,
        PathKind::Helix { .. } => path.length() * path.axis_angle().sin().abs() / path.center_radius(),
    };
    (axial + azimuthal) / (2.0 * PI)
}

fn fourier_nodes(path: &NanotubePath, field: &dyn Field, max_dk: f64, cfg: &AbsorptionConfig) -> Vec<(f64, f64)> {
    let transfer_cycles = max_dk.abs() * path.length() / (2.0 * PI);
    let n = (cfg.samples_per_wavelength as f64 * (field_cycles(path, field) + 1.0)).ceil() as usize
        + GL_ORDER * transfer_cycles.ceil() as usize;
    let panels = n.max(cfg.min_samples).div_ceil(GL_ORDER);
    let (lo, hi) = path.s_range();
    composite_gauss_legendre(lo, hi, panels, GL_ORDER)
}

/// `(1/L) int A_par(s) e^{i s dk} ds`, V s / m.
pub fn fourier_coefficient(path: &NanotubePath, field: &dyn Field, delta_k: f64, cfg: &AbsorptionConfig) -> Complex64 {
    let nodes = fourier_nodes(path, field, delta_k, cfg);
    let sum: Complex64 = nodes
        .iter()
        .map(|&(s, w)| parallel_potential(path, field, s) * Complex64::from_polar(w, s * delta_k))
        .sum();
    sum / path.length()
}

/// Coefficients at `dk = 2 pi j / L` for `j` in `j_lo..=j_hi`.
pub fn fourier_coefficients(
    path: &NanotubePath,
    field: &dyn Field,
    j_lo: i64,
    j_hi: i64,
    cfg: &AbsorptionConfig,
) -> Vec<Complex64> {
    let l = path.length();
    let base_k = 2.0 * PI / l;
    let max_dk = base_k * j_lo.abs().max(j_hi.abs()) as f64;
    let nodes = fourier_nodes(path, field, max_dk, cfg);
    let weighted: Vec<(f64, Complex64)> = nodes
        .iter()
        .map(|&(s, w)| (s, parallel_potential(path, field, s) * w / l))
        .collect();
    let js: Vec<i64> = (j_lo..=j_hi).collect();
    js.par_chunks(128)
        .flat_map_iter(|chunk| {
            let j0 = chunk[0];
            let mut phase: Vec<Complex64> =
                weighted.iter().map(|&(s, _)| Complex64::from_polar(1.0, base_k * j0 as f64 * s)).collect();
            let step: Vec<Complex64> = weighted.iter().map(|&(s, _)| Complex64::from_polar(1.0, base_k * s)).collect();
            chunk
                .iter()
                .map(|_| {
                    let c: Complex64 = weighted.iter().zip(&phase).map(|(&(_, g), z)| g * z).sum();
                    for (z, st) in phase.iter_mut().zip(&step) {
                        *z *= st;
                    }
                    c
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Fourier-side evaluation of `int |A_par|^2 ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalSum {
    /// `L sum_{|j| <= J} |c_j|^2`
    pub window: f64,
    /// Asymptotic estimate of the terms with `|j| > J`.
    pub tail: f64,
}

impl ParsevalSum {
    pub fn total(&self) -> f64 {
        self.window + self.tail
    }
}

/// `L sum_j |c_j|^2` over `|j| <= j_max`, plus the tail from the end-point
/// discontinuity of the periodic extension, in the units of
/// [`intensity_integral`].
pub fn parseval_sum(path: &NanotubePath, field: &dyn Field, j_max: i64, cfg: &AbsorptionConfig) -> ParsevalSum {
    let coeffs = fourier_coefficients(path, field, -j_max, j_max, cfg);
    let window = path.length() * coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * NM;
    let (lo, hi) = path.s_range();
    let jump = (parallel_potential(path, field, hi) - parallel_potential(path, field, lo)).norm_sqr();
    // |c_j| ~ |jump| / (2 pi |j|); two sides of the window
    let tail = path.length() * NM * jump / (2.0 * PI * PI) * inverse_square_tail(j_max);
    ParsevalSum { window, tail }
}

/// `sum_{j > n} 1/j^2`.
fn inverse_square_tail(n: i64) -> f64 {
    let x = n as f64 + 1.0;
    // trigamma(x) asymptotic series
    let x2 = x * x;
    1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x) + 1.0 / (42.0 * x2 * x2 * x2 * x)
}

/// `1 - exp(-U I / F)`.
pub fn eta_from_parts(u: f64, intensity: f64, flux: f64) -> f64 {
    -(-u * intensity / flux).exp_m1()
}

pub fn eta(tube: &ZigzagTube, path: &NanotubePath, field: &dyn Field, energy_ev: f64, cfg: &AbsorptionConfig) -> Result<f64> {
    cfg.validate()?;
    let u = spectral_density_u(tube, energy_ev, cfg)?;
    Ok(eta_from_parts(u.value, intensity_integral(path, field, cfg), field.flux()))
}

/// Builds the field seen at each photon energy.
pub trait FieldFactory: Sync {
    fn field(&self, energy_ev: f64) -> Result<Box<dyn Field>>;
}

/// Guided mode re-solved at every energy.
#[derive(Debug, Clone)]
pub struct FiberFieldFactory {
    pub spec: FiberSpec,
    pub flux: f64,
    pub f: i32,
    pub p: i32,
    cache: ModeCache,
}

impl FiberFieldFactory {
    pub fn new(spec: FiberSpec, flux: f64) -> Self {
        Self { spec, flux, f: 1, p: 1, cache: ModeCache::new() }
    }

    pub fn with_labels(mut self, f: i32, p: i32) -> Self {
        self.f = f;
        self.p = p;
        self
    }

    pub fn fiber_field(&self, energy_ev: f64) -> Result<FiberField> {
        check_energy(energy_ev)?;
        let mode = self.cache.get(&self.spec, ev_to_wavelength_nm(energy_ev), self.f, self.p)?;
        FiberField::new(mode, self.spec, self.flux)
    }
}

impl FieldFactory for FiberFieldFactory {
    fn field(&self, energy_ev: f64) -> Result<Box<dyn Field>> {
        Ok(Box::new(self.fiber_field(energy_ev)?))
    }
}

/// Linearly polarised beam of fixed cross-section.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWaveFactory {
    pub flux: f64,
    /// nm^2
    pub area: f64,
    pub polarization: [f64; 3],
}

impl FieldFactory for PlaneWaveFactory {
    fn field(&self, energy_ev: f64) -> Result<Box<dyn Field>> {
        check_energy(energy_ev)?;
        Ok(Box::new(PlaneWave::new(self.flux, ev_to_omega(energy_ev), self.area, self.polarization)?))
    }
}

/// One tube with cached rate densities on the energies it has seen.
#[derive(Debug)]
pub struct Absorber {
    spectrum: TubeSpectrum,
    cfg: AbsorptionConfig,
    cache: RwLock<HashMap<u64, f64>>,
}

impl Absorber {
    pub fn new(tube: &ZigzagTube, cfg: &AbsorptionConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { spectrum: TubeSpectrum::new(tube)?, cfg: *cfg, cache: RwLock::new(HashMap::new()) })
    }

    pub fn config(&self) -> &AbsorptionConfig {
        &self.cfg
    }

    pub fn tube(&self) -> &ZigzagTube {
        self.spectrum.tube()
    }

    /// `U` in SI at `energy_ev`.
    pub fn u(&self, energy_ev: f64) -> Result<f64> {
        let key = energy_ev.to_bits();
        if let Some(v) = self.cache.read().expect("rate cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = self.spectrum.u(energy_ev, self.cfg.gamma, self.cfg.k_tolerance)?.value;
        self.cache.write().expect("rate cache poisoned").insert(key, v);
        Ok(v)
    }

    /// Fill the cache for many energies in parallel.
    pub fn prime(&self, energies: &[f64]) -> Result<()> {
        let missing: Vec<f64> = {
            let c = self.cache.read().expect("rate cache poisoned");
            energies.iter().copied().filter(|e| !c.contains_key(&e.to_bits())).collect()
        };
        let computed: Vec<(u64, f64)> = missing
            .par_iter()
            .map(|&e| Ok((e.to_bits(), self.spectrum.u(e, self.cfg.gamma, self.cfg.k_tolerance)?.value)))
            .collect::<Result<_>>()?;
        self.cache.write().expect("rate cache poisoned").extend(computed);
        Ok(())
    }

    pub fn eta(&self, path: &NanotubePath, field: &dyn Field, energy_ev: f64) -> Result<f64> {
        let u = self.u(energy_ev)?;
        Ok(eta_from_parts(u, intensity_integral(path, field, &self.cfg), field.flux()))
    }

    /// `eta` at each energy, fields supplied by `factory`.
    pub fn eta_spectrum(&self, path: &NanotubePath, factory: &dyn FieldFactory, energies: &[f64]) -> Result<Vec<f64>> {
        self.prime(energies)?;
        energies
            .par_iter()
            .map(|&e| {
                let field = factory.field(e)?;
                self.eta(path, field.as_ref(), e)
            })
            .collect()
    }

    /// Uniform-lineshape average over the configured window.
    pub fn eta_bar(&self, path: &NanotubePath, factory: &dyn FieldFactory) -> Result<f64> {
        Ok(trapezoid_mean(&self.eta_spectrum(path, factory, &self.cfg.energies())?))
    }
}

pub fn eta_bar(tube: &ZigzagTube, path: &NanotubePath, factory: &dyn FieldFactory, cfg: &AbsorptionConfig) -> Result<f64> {
    Absorber::new(tube, cfg)?.eta_bar(path, factory)
}
