//! Optical transition amplitudes between valence state `(mu, k)` and
//! conduction state `(mu', k')` of a zigzag tube.
//!
//! The axial amplitude `D_z` is the one used for absorption. The transverse
//! amplitudes `D_x`, `D_y` include the tube curvature and are kept for
//! selection-rule checks.
//!
//! All amplitudes are in nm^-1. Phase factors follow the momentum transfer
//! `k' - k`, so a uniform field along the tube reproduces the usual
//! `mu' = mu` (axial) and `mu' = mu +- 1` (transverse) selection rules.

use crate::constants::{ev_to_joule, ELECTRON_MASS, HBAR, NM};
use crate::error::{Error, Result};
use crate::graphene::{Band, BandCoefficients, KPoint, DIRAC_TOLERANCE};
use crate::nanotube::ZigzagTube;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One Cartesian component of the transition amplitude, nm^-1.
pub type TransitionAmplitude = Complex64;

/// Momentum matrix element between neighbouring p_z orbitals, nm^-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixElementM {
    pub value: f64,
}

impl MatrixElementM {
    /// `2 a gamma0 m_e / (hbar^2 sqrt3)` with `gamma0` in eV and `a` in nm.
    pub fn new(gamma0_ev: f64, a_nm: f64) -> Self {
        let si = 2.0 * a_nm * NM * ev_to_joule(gamma0_ev) * ELECTRON_MASS / (HBAR * HBAR * 3f64.sqrt());
        Self { value: si * NM }
    }

    pub fn for_tube(tube: &ZigzagTube) -> Self {
        let p = tube.params();
        Self::new(p.gamma0, p.lattice.a())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Axial amplitude for a direct transition `k' = k` on line `mu`. Always real.
pub fn dz_diagonal(tube: &ZigzagTube, mu: i32, k_par: f64) -> Result<f64> {
    let p = tube.params();
    let k = tube.kpoint(mu, k_par);
    let phi = p.lattice.structure_factor(k);
    let mag = phi.norm();
    if mag < DIRAC_TOLERANCE {
        return Err(Error::DiracPoint { kx: k.kx, ky: k.ky, magnitude: mag });
    }
    let denom = 1.0 - p.u * p.u * mag * mag;
    if denom <= 0.0 {
        return Err(Error::OverlapSingularity { denominator: denom });
    }
    let (va, _) = p.lattice.neighbor_velocity_sums(k);
    let m = MatrixElementM::for_tube(tube).value;
    let a = p.lattice.a();
    Ok(-(m * 3f64.sqrt() / a) * (va[0] * phi.conj() / (mag * denom.sqrt())).re)
}

struct Pair {
    k_out: KPoint,
    k_in: KPoint,
    c_out: BandCoefficients,
    c_in: BandCoefficients,
}

fn pair(tube: &ZigzagTube, mu_out: i32, k_out: f64, mu_in: i32, k_in: f64) -> Result<Pair> {
    let p = tube.params();
    let k_out = tube.kpoint(mu_out, k_out);
    let k_in = tube.kpoint(mu_in, k_in);
    Ok(Pair {
        k_out,
        k_in,
        c_out: p.band_coefficients(k_out, Band::Conduction)?,
        c_in: p.band_coefficients(k_in, Band::Valence)?,
    })
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Full axial amplitude between `(mu_in, k_in)` in the valence band and
/// `(mu_out, k_out)` in the conduction band.
pub fn dz_full(tube: &ZigzagTube, mu_out: i32, k_out: f64, mu_in: i32, k_in: f64) -> Result<TransitionAmplitude> {
    let pr = pair(tube, mu_out, k_out, mu_in, k_in)?;
    let lat = &tube.params().lattice;
    let a = lat.a();
    let n = tube.n();
    let (va, _) = lat.neighbor_velocity_sums(pr.k_in);
    let vz = va[0];
    let (dkx, dky) = (pr.k_out.kx - pr.k_in.kx, pr.k_out.ky - pr.k_in.ky);
    let bond = Complex64::new(1.0, 0.0) + cis(-a * (dkx * 3f64.sqrt() / 2.0 + dky / 2.0));
    let shift_b = cis(-a * dkx / 3f64.sqrt());
    let ab = pr.c_out.ca.conj() * pr.c_in.cb;
    let ba = pr.c_out.cb.conj() * pr.c_in.ca;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 1..=n {
        let ring = cis(-(j as f64) * a * dky);
        sum += ab * ring * bond * vz - ba * ring * shift_b * bond * vz.conj();
    }
    let m = MatrixElementM::for_tube(tube).value;
    Ok(sum * (m * 3f64.sqrt() / (2.0 * a * n as f64)))
}

/// Curvature parameters `v_+`, `v_-` for the A and B sublattices at `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureParams {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
}

pub fn curvature_params(tube: &ZigzagTube, k: KPoint) -> CurvatureParams {
    let a = tube.params().lattice.a();
    let s3 = 3f64.sqrt();
    let n = tube.n() as f64;
    let phase = |x: f64, y: f64| cis(a * (k.kx * x + k.ky * y));
    let step = |sign: f64| cis(sign * PI / n) - 1.0;
    let a_lo = phase(-1.0 / (2.0 * s3), -0.5);
    let a_hi = phase(-1.0 / (2.0 * s3), 0.5);
    let b_lo = phase(1.0 / (2.0 * s3), -0.5);
    let b_hi = phase(1.0 / (2.0 * s3), 0.5);
    CurvatureParams {
        a_plus: a_lo * step(-1.0) + a_hi * step(1.0),
        a_minus: a_lo * step(1.0) + a_hi * step(-1.0),
        b_plus: b_lo * step(-1.0) + b_hi * step(1.0),
        b_minus: b_lo * step(1.0) + b_hi * step(-1.0),
    }
}

/// Transverse velocity component at azimuth `theta` built from `v_+`, `v_-`.
/// Satisfies `v_x +- i v_y = R_t e^{+-i theta} v_+-`.
pub fn rotated_velocity(radius: f64, plus: Complex64, minus: Complex64, theta: f64, axis: Axis) -> Complex64 {
    let p = cis(theta) * plus;
    let m = cis(-theta) * minus;
    match axis {
        Axis::X => radius * (p + m) / 2.0,
        Axis::Y => radius * (p - m) / Complex64::new(0.0, 2.0),
    }
}

/// Full transverse amplitude including tube curvature.
pub fn dxy_full(
    tube: &ZigzagTube,
    mu_out: i32,
    k_out: f64,
    mu_in: i32,
    k_in: f64,
    axis: Axis,
) -> Result<TransitionAmplitude> {
    let pr = pair(tube, mu_out, k_out, mu_in, k_in)?;
    let a = tube.params().lattice.a();
    let s3 = 3f64.sqrt();
    let n = tube.n();
    let nf = n as f64;
    let rt = tube.radius();
    let cp = curvature_params(tube, pr.k_in);
    let (dkx, dky) = (pr.k_out.kx - pr.k_in.kx, pr.k_out.ky - pr.k_in.ky);
    let shift = |x: f64, y: f64| cis(-a * (dkx * x + dky * y));
    let a_half = shift(1.0 / (2.0 * s3), 0.5);
    let b_whole = shift(1.0 / s3, 0.0);
    let b_half = shift(5.0 / (2.0 * s3), 0.5);
    let ab = pr.c_out.ca.conj() * pr.c_in.cb;
    let ba = pr.c_out.cb.conj() * pr.c_in.ca;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 1..=n {
        let ring = cis(-(j as f64) * a * dky);
        let th = 2.0 * PI * j as f64 / nf;
        let th_half = 2.0 * PI * (j as f64 + 0.5) / nf;
        let va = rotated_velocity(rt, cp.a_plus, cp.a_minus, th, axis)
            + rotated_velocity(rt, cp.a_plus, cp.a_minus, th_half, axis) * a_half;
        let vb = rotated_velocity(rt, cp.b_plus, cp.b_minus, th, axis) * b_whole
            + rotated_velocity(rt, cp.b_plus, cp.b_minus, th_half, axis) * b_half;
        sum += ring * (ab * va - ba * vb);
    }
    let m = MatrixElementM::for_tube(tube).value;
    Ok(sum * (m * s3 / (2.0 * a * nf)))
}
