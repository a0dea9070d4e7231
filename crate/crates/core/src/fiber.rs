//! Fundamental HE11 mode of a step-index nanofiber and the coherent-state
//! vector potential it carries, plus a uniform plane-wave reference field.
//!
//! Lengths are in nm and the fiber axis is z. Field amplitudes are returned
//! in SI units (V s / m).

use crate::constants::{wavelength_nm_to_omega, EPSILON_0, HBAR, NM, SPEED_OF_LIGHT};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::roots::bisect;
use crate::special::{bessel_j012, bessel_k012};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

/// Points in the coarse scan of the propagation-constant bracket.
pub const BETA_SCAN_POINTS: usize = 4096;
/// Extra log-spaced points between the cladding light line and the first
/// uniform point, for weakly guided modes with `n_eff - n_clad` down to 1e-15.
pub const BETA_SCAN_LOG_POINTS: usize = 256;
/// Relative frequency step for the group-slowness finite difference.
pub const BETA_PRIME_STEP: f64 = 1e-6;

const C_NM: f64 = SPEED_OF_LIGHT / NM;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberSpec {
    /// nm
    pub radius: f64,
    pub n_core: f64,
    pub n_clad: f64,
}

impl Default for FiberSpec {
    fn default() -> Self {
        Self { radius: 125.0, n_core: 1.45, n_clad: 1.0 }
    }
}

impl FiberSpec {
    pub fn new(radius: f64, n_core: f64, n_clad: f64) -> Result<Self> {
        let s = Self { radius, n_core, n_clad };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid("fiber.radius", format!("must be positive, got {}", self.radius)));
        }
        if !(self.n_clad >= 1.0 && self.n_core > self.n_clad) {
            return Err(invalid(
                "fiber.n_core",
                format!("need n_core > n_clad >= 1, got {} and {}", self.n_core, self.n_clad),
            ));
        }
        Ok(())
    }

    /// Normalised frequency `V = k R sqrt(n1^2 - n2^2)`.
    pub fn v_number(&self, wavelength_nm: f64) -> f64 {
        2.0 * PI / wavelength_nm * self.radius * (self.n_core.powi(2) - self.n_clad.powi(2)).sqrt()
    }

    /// Left minus right side of the HE11 eigenvalue equation at `beta` (nm^-1)
    /// for vacuum wavenumber `k` (nm^-1), together with the scale of the terms.
    pub fn dispersion_residual(&self, k: f64, beta: f64) -> (f64, f64) {
        self.residual_at(k, self.fraction(k, beta))
    }

    /// Position of `beta` between the cladding (0) and core (1) light lines.
    fn fraction(&self, k: f64, beta: f64) -> f64 {
        (beta / k - self.n_clad) / (self.n_core - self.n_clad)
    }

    fn beta_at(&self, k: f64, t: f64) -> f64 {
        k * (self.n_clad + (self.n_core - self.n_clad) * t)
    }

    /// `(h, q)` at fraction `t`, accurate right up to either light line.
    fn transverse_at(&self, k: f64, t: f64) -> (f64, f64) {
        let (n1, n2) = (self.n_core, self.n_clad);
        let dn = n1 - n2;
        let h = k * (dn * (1.0 - t) * (n1 + n2 + dn * t)).sqrt();
        let q = k * (dn * t * (2.0 * n2 + dn * t)).sqrt();
        (h, q)
    }

    fn residual_at(&self, k: f64, t: f64) -> (f64, f64) {
        let (n1, n2, r) = (self.n_core, self.n_clad, self.radius);
        let beta = self.beta_at(k, t);
        let (h, q) = self.transverse_at(k, t);
        let (hr, qr) = (h * r, q * r);
        let (j0, j1, _) = bessel_j012(hr);
        let (k0, k1, k2) = bessel_k012(qr);
        let k1p = -(k0 + k2) / 2.0;
        let kk = k1p / (qr * k1);
        let lhs = j0 / (hr * j1);
        let root = ((n1 * n1 - n2 * n2) / (2.0 * n1 * n1) * kk).powi(2)
            + (beta / (n1 * k)).powi(2) * (1.0 / (qr * qr) + 1.0 / (hr * hr)).powi(2);
        let rhs = -(n1 * n1 + n2 * n2) / (2.0 * n1 * n1) * kk + 1.0 / (hr * hr) - root.sqrt();
        (lhs - rhs, lhs.abs().max(rhs.abs()))
    }

    fn refine_root(&self, k: f64, lo: f64, hi: f64) -> Option<f64> {
        let t = bisect(|t| self.residual_at(k, t).0, lo, hi, 1e-15);
        let ends = self.residual_at(k, lo).0.abs().max(self.residual_at(k, hi).0.abs());
        let res = self.residual_at(k, t).0;
        // a sign change across a pole of J0/J1 bisects onto a huge residual
        (res.abs() <= 1e-3 * ends).then_some(t)
    }

    fn fraction_roots(&self, k: f64) -> Vec<f64> {
        let first = 1.0 / (BETA_SCAN_POINTS + 1) as f64;
        let log_lo = 1e-15f64.ln();
        let ts = (0..BETA_SCAN_LOG_POINTS)
            .map(|i| (log_lo + (first.ln() - log_lo) * i as f64 / BETA_SCAN_LOG_POINTS as f64).exp())
            .chain((1..=BETA_SCAN_POINTS).map(|i| i as f64 * first));
        let grid: Vec<(f64, f64)> = ts.map(|t| (t, self.residual_at(k, t).0)).collect();
        grid.windows(2)
            .filter(|w| w[0].1.is_finite() && w[1].1.is_finite() && (w[0].1 < 0.0) != (w[1].1 < 0.0))
            .filter_map(|w| self.refine_root(k, w[0].0, w[1].0))
            .collect()
    }

    /// All guided-mode roots in the bracket for vacuum wavenumber `k`.
    pub fn beta_roots(&self, k: f64) -> Vec<f64> {
        self.fraction_roots(k).into_iter().map(|t| self.beta_at(k, t)).collect()
    }

    fn solve_fraction(&self, wavelength_nm: f64) -> Result<f64> {
        let k = 2.0 * PI / wavelength_nm;
        let roots = self.fraction_roots(k);
        match roots.len() {
            0 => Err(Error::NoGuidedMode { radius_nm: self.radius, wavelength_nm }),
            1 => Ok(roots[0]),
            n => Err(Error::MultiMode { wavelength_nm, roots: n, v_number: self.v_number(wavelength_nm) }),
        }
    }

    /// Root near fraction `guess` for a slightly shifted frequency.
    fn solve_fraction_near(&self, k: f64, guess: f64) -> Result<f64> {
        // bracket multiplicatively so tiny fractions near cutoff keep their precision
        let mut factor: f64 = 1.0 + 1e-3;
        while factor < 1e30 {
            let a = guess / factor;
            let b = (guess * factor).min(1.0f64.next_down());
            let (fa, fb) = (self.residual_at(k, a).0, self.residual_at(k, b).0);
            if (fa < 0.0) != (fb < 0.0) {
                if let Some(t) = self.refine_root(k, a, b) {
                    return Ok(t);
                }
            }
            factor *= factor;
        }
        let wavelength_nm = 2.0 * PI / k;
        Err(Error::NoGuidedMode { radius_nm: self.radius, wavelength_nm })
    }
}

/// A solved fundamental mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuidedMode {
    /// rad/s
    pub omega: f64,
    /// nm
    pub wavelength: f64,
    /// nm^-1
    pub beta: f64,
    /// nm^-1
    pub h: f64,
    /// nm^-1
    pub q: f64,
    pub g: f64,
    /// propagation direction, +-1
    pub f: i32,
    /// circular polarisation, +-1
    pub p: i32,
    /// nm^2
    pub norm_a: f64,
    /// d beta / d omega, s/nm
    pub beta_prime: f64,
}

/// Solve the fundamental mode with `f = p = +1`.
pub fn solve_eigenvalue(spec: &FiberSpec, wavelength_nm: f64) -> Result<GuidedMode> {
    solve_mode(spec, wavelength_nm, 1, 1)
}

pub fn solve_mode(spec: &FiberSpec, wavelength_nm: f64, f: i32, p: i32) -> Result<GuidedMode> {
    spec.validate()?;
    if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
        return Err(invalid("wavelength", format!("must be positive, got {wavelength_nm}")));
    }
    if f.abs() != 1 || p.abs() != 1 {
        return Err(invalid("mode", format!("f and p must be +-1, got {f}, {p}")));
    }
    let t = spec.solve_fraction(wavelength_nm)?;
    let k = 2.0 * PI / wavelength_nm;
    let beta = spec.beta_at(k, t);
    let omega = wavelength_nm_to_omega(wavelength_nm);

    let dk = BETA_PRIME_STEP * k;
    let b_up = spec.beta_at(k + dk, spec.solve_fraction_near(k + dk, t)?);
    let b_dn = spec.beta_at(k - dk, spec.solve_fraction_near(k - dk, t)?);
    // omega = c k, so d beta / d omega = (d beta / d k) / c
    let beta_prime = (b_up - b_dn) / (2.0 * dk) / C_NM;

    let r = spec.radius;
    let (h, q) = spec.transverse_at(k, t);
    let (hr, qr) = (h * r, q * r);
    let (j0, j1, _) = bessel_j012(hr);
    let (k0, k1, k2) = bessel_k012(qr);
    let j1p = j0 - j1 / hr;
    let k1p = -(k0 + k2) / 2.0;
    let g = (1.0 / (qr * qr) + 1.0 / (hr * hr)) / (j1p / (hr * j1) + k1p / (qr * k1));

    let mut mode = GuidedMode { omega, wavelength: wavelength_nm, beta, h, q, g, f, p, norm_a: 0.0, beta_prime };
    mode.norm_a = normalization(&mode, spec);
    Ok(mode)
}

impl GuidedMode {
    /// Same mode with a different direction and polarisation.
    pub fn with_labels(mut self, f: i32, p: i32) -> Result<Self> {
        if f.abs() != 1 || p.abs() != 1 {
            return Err(invalid("mode", format!("f and p must be +-1, got {f}, {p}")));
        }
        self.f = f;
        self.p = p;
        Ok(self)
    }

    pub fn effective_index(&self) -> f64 {
        self.beta * self.wavelength / (2.0 * PI)
    }
}

/// Cylindrical profile `(e_r, e_phi, e_z)` at radius `r` (nm). The azimuthal
/// phase `e^{i p phi}` is not included.
pub fn mode_profile(mode: &GuidedMode, spec: &FiberSpec, r: f64) -> [Complex64; 3] {
    let (g, pf, ff) = (mode.g, mode.p as f64, mode.f as f64);
    let i = Complex64::new(0.0, 1.0);
    let (_, j1_r, _) = bessel_j012(mode.h * spec.radius);
    let (_, k1_r, _) = bessel_k012(mode.q * spec.radius);
    if r < spec.radius {
        let (j0, j1, j2) = bessel_j012(mode.h * r);
        let pre = mode.q * k1_r / (mode.h * j1_r);
        [
            i * pre * ((1.0 - g) * j0 - (1.0 + g) * j2),
            Complex64::from(-pf * pre * ((1.0 - g) * j0 + (1.0 + g) * j2)),
            Complex64::from(ff * 2.0 * mode.q * k1_r / (mode.beta * j1_r) * j1),
        ]
    } else {
        let (k0, k1, k2) = bessel_k012(mode.q * r);
        [
            i * ((1.0 - g) * k0 + (1.0 + g) * k2),
            Complex64::from(-pf * ((1.0 - g) * k0 - (1.0 + g) * k2)),
            Complex64::from(ff * 2.0 * mode.q / mode.beta * k1),
        ]
    }
}

fn profile_norm_sqr(mode: &GuidedMode, spec: &FiberSpec, r: f64) -> f64 {
    mode_profile(mode, spec, r).iter().map(|c| c.norm_sqr()).sum()
}

/// Outer radius beyond which `|e|^2 r` is below 1e-16 of its value at the surface.
pub fn outer_cutoff(mode: &GuidedMode, spec: &FiberSpec) -> f64 {
    let peak = profile_norm_sqr(mode, spec, spec.radius) * spec.radius;
    let mut r = spec.radius;
    let step = 1.0 / mode.q;
    while profile_norm_sqr(mode, spec, r) * r > 1e-16 * peak {
        r += step;
    }
    r
}

/// `2 pi [ n1^2 int_0^R |e|^2 r dr + n2^2 int_R^inf |e|^2 r dr ]`, nm^2.
pub fn normalization(mode: &GuidedMode, spec: &FiberSpec) -> f64 {
    normalization_with_tolerance(mode, spec, 1e-11)
}

pub fn normalization_with_tolerance(mode: &GuidedMode, spec: &FiberSpec, rel: f64) -> f64 {
    let tol = Tolerance::relative(rel);
    let inner = integrate(|r| profile_norm_sqr(mode, spec, r) * r, &[0.0, spec.radius], tol).value;
    let r_max = outer_cutoff(mode, spec);
    // weakly guided modes reach out ~1/q, which can be millimetres
    let mut breaks = vec![spec.radius];
    while breaks[breaks.len() - 1] * 2.0 < r_max {
        breaks.push(breaks[breaks.len() - 1] * 2.0);
    }
    breaks.push(r_max);
    let outer = integrate(|r| profile_norm_sqr(mode, spec, r) * r, &breaks, tol).value;
    2.0 * PI * (spec.n_core.powi(2) * inner + spec.n_clad.powi(2) * outer)
}

/// Complex vector potential sampled at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    /// Cartesian components, V s / m
    pub a_plus: [Complex64; 3],
    /// nm
    pub position: [f64; 3],
}

/// A positive-frequency vector potential defined everywhere in space.
pub trait Field: Send + Sync {
    /// Cartesian `A+` at `point` (nm), V s / m.
    fn potential(&self, point: [f64; 3]) -> [Complex64; 3];
    /// Photon flux, photons per second.
    fn flux(&self) -> f64;
    /// Wavenumber of the phase advance along z, nm^-1.
    fn axial_wavenumber(&self) -> f64 {
        0.0
    }
}

/// Guided-mode field with a fixed photon flux.
#[derive(Debug, Clone)]
pub struct FiberField {
    pub mode: GuidedMode,
    pub spec: FiberSpec,
    flux: f64,
    prefactor: f64,
}

impl FiberField {
    pub fn new(mode: GuidedMode, spec: FiberSpec, flux: f64) -> Result<Self> {
        if !(flux > 0.0 && flux.is_finite()) {
            return Err(invalid("flux", format!("must be positive, got {flux}")));
        }
        let beta_prime_si = mode.beta_prime / NM;
        let area_si = mode.norm_a * NM * NM;
        let prefactor = (flux * HBAR * beta_prime_si / (2.0 * mode.omega * EPSILON_0 * area_si)).sqrt();
        Ok(Self { mode, spec, flux, prefactor })
    }

    /// `sqrt(F hbar beta' / (2 omega eps0 A))`, V s / m.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }
}

/// Convert a cylindrical vector at azimuth `phi` to Cartesian components.
pub fn cylindrical_to_cartesian(v: [Complex64; 3], phi: f64) -> [Complex64; 3] {
    let (s, c) = phi.sin_cos();
    [v[0] * c - v[1] * s, v[0] * s + v[1] * c, v[2]]
}

impl Field for FiberField {
    fn potential(&self, point: [f64; 3]) -> [Complex64; 3] {
        vector_potential_at(self, point)
    }

    fn flux(&self) -> f64 {
        self.flux
    }

    fn axial_wavenumber(&self) -> f64 {
        self.mode.beta
    }
}

fn vector_potential_at(field: &FiberField, point: [f64; 3]) -> [Complex64; 3] {
    let [x, y, z] = point;
    let r = x.hypot(y);
    let phi = y.atan2(x);
    let m = &field.mode;
    let e = mode_profile(m, &field.spec, r);
    let phase = Complex64::from_polar(field.prefactor, m.f as f64 * m.beta * z + m.p as f64 * phi);
    let cart = cylindrical_to_cartesian(e, phi);
    [cart[0] * phase, cart[1] * phase, cart[2] * phase]
}

/// Guided-mode vector potential at `point` (nm) for photon flux `flux`.
pub fn vector_potential(mode: &GuidedMode, spec: &FiberSpec, flux: f64, point: [f64; 3]) -> Result<FieldSample> {
    let field = FiberField::new(*mode, *spec, flux)?;
    Ok(FieldSample { a_plus: field.potential(point), position: point })
}

/// Uniform linearly polarised beam of cross-section `area` (nm^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    flux: f64,
    amplitude: f64,
    polarization: [f64; 3],
}

impl PlaneWave {
    pub fn new(flux: f64, omega: f64, area_nm2: f64, polarization: [f64; 3]) -> Result<Self> {
        if !(flux > 0.0 && flux.is_finite()) {
            return Err(invalid("flux", format!("must be positive, got {flux}")));
        }
        if !(area_nm2 > 0.0 && area_nm2.is_finite()) {
            return Err(invalid("beam_area", format!("must be positive, got {area_nm2}")));
        }
        let norm = polarization.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("polarization", "must be a non-zero vector"));
        }
        let amplitude = (flux * HBAR / (2.0 * omega * EPSILON_0 * SPEED_OF_LIGHT * area_nm2 * NM * NM)).sqrt();
        Ok(Self { flux, amplitude, polarization: polarization.map(|c| c / norm) })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

impl Field for PlaneWave {
    fn potential(&self, _point: [f64; 3]) -> [Complex64; 3] {
        self.polarization.map(|c| Complex64::from(c * self.amplitude))
    }

    fn flux(&self) -> f64 {
        self.flux
    }
}

pub fn plane_wave_potential(flux: f64, omega: f64, area_nm2: f64, polarization: [f64; 3]) -> Result<FieldSample> {
    let pw = PlaneWave::new(flux, omega, area_nm2, polarization)?;
    Ok(FieldSample { a_plus: pw.potential([0.0; 3]), position: [0.0; 3] })
}

type ModeKey = (u64, u64, u64, u64, i32, i32);

/// Shared cache of solved modes keyed by fiber, wavelength and labels.
#[derive(Debug, Default, Clone)]
pub struct ModeCache {
    inner: Arc<RwLock<HashMap<ModeKey, GuidedMode>>>,
}

impl ModeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, spec: &FiberSpec, wavelength_nm: f64, f: i32, p: i32) -> Result<GuidedMode> {
        let key = (
            spec.radius.to_bits(),
            spec.n_core.to_bits(),
            spec.n_clad.to_bits(),
            wavelength_nm.to_bits(),
            f,
            p,
        );
        if let Some(m) = self.inner.read().expect("mode cache poisoned").get(&key) {
            return Ok(*m);
        }
        let m = solve_mode(spec, wavelength_nm, f, p)?;
        self.inner.write().expect("mode cache poisoned").insert(key, m);
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("mode cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
