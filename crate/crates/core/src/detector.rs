//! Device-level efficiency from many independent tubes: parallel arrays and
//! randomly placed forests of vertical tubes crossing the fiber.

use crate::absorption::{uniform_grid, AbsorptionConfig, Absorber, FiberFieldFactory, intensity_integral};
use crate::error::{invalid, Error, Result};
use crate::fiber::FiberSpec;
use crate::graphene::TBParams;
use crate::nanotube::{is_semiconducting, ZigzagTube};
use crate::path::NanotubePath;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Per-tube probabilities of an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerTube {
    Uniform(f64),
    Each(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub count: u64,
    pub per_tube: PerTube,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("eta", format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// `1 - prod (1 - eta_i)`, accumulated in log space.
pub fn compose(etas: &[f64]) -> f64 {
    -etas.iter().map(|e| (-e).ln_1p()).sum::<f64>().exp_m1()
}

pub fn eta_total(spec: &ArraySpec) -> Result<f64> {
    if spec.count == 0 {
        return Err(invalid("array.count", "must be at least 1"));
    }
    match &spec.per_tube {
        PerTube::Uniform(e) => {
            check_probability(*e)?;
            Ok(-(spec.count as f64 * (-e).ln_1p()).exp_m1())
        }
        PerTube::Each(v) => {
            if v.len() as u64 != spec.count {
                return Err(invalid("array.per_tube", format!("{} values for {} tubes", v.len(), spec.count)));
            }
            v.iter().try_for_each(|e| check_probability(*e))?;
            Ok(compose(v))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestSpec {
    /// Tubes per um^2 of the substrate plane.
    pub density: f64,
    /// Outer edge of the region, nm from the fiber surface.
    pub radial_extent: f64,
    /// Inner edge of the region, nm from the fiber surface.
    pub min_gap: f64,
    /// Region length along the fiber, nm.
    pub axial_extent: f64,
    /// nm
    pub tube_length: f64,
    /// nm
    pub diameter_range: [f64; 2],
    /// Populate both sides of the fiber.
    pub both_sides: bool,
    /// Monte Carlo budget: tubes actually evaluated (stratified in distance).
    pub samples: usize,
    /// Set from the run's top-level seed, so not part of this section.
    #[serde(skip)]
    pub seed: u64,
    /// eV
    pub energy_window: [f64; 2],
    pub energy_grid: usize,
}

impl Default for ForestSpec {
    fn default() -> Self {
        Self {
            density: 900.0,
            radial_extent: 500.0,
            min_gap: 1.25,
            axial_extent: 15_000.0,
            tube_length: 2_000.0,
            diameter_range: [0.5, 1.5],
            both_sides: true,
            samples: 10_000,
            seed: 1,
            energy_window: [0.9, 3.0],
            energy_grid: 256,
        }
    }
}

impl ForestSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.density >= 0.0 && self.density.is_finite()) {
            return Err(invalid("forest.density", format!("must be non-negative, got {}", self.density)));
        }
        if !(self.min_gap >= 1.0 && self.radial_extent > self.min_gap) {
            return Err(invalid(
                "forest.radial_extent",
                format!("need 1 <= min_gap < radial_extent, got {} and {}", self.min_gap, self.radial_extent),
            ));
        }
        if !(self.axial_extent > 0.0 && self.tube_length > 0.0) {
            return Err(invalid("forest.axial_extent", "axial extent and tube length must be positive"));
        }
        let [lo, hi] = self.diameter_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(invalid("forest.diameter_range", format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
        }
        if self.samples < 2 {
            return Err(invalid("forest.samples", "must be at least 2"));
        }
        let [elo, ehi] = self.energy_window;
        if !(elo > 0.0 && elo < ehi) {
            return Err(invalid("forest.energy_window", format!("need 0 < lo < hi, got [{elo}, {ehi}]")));
        }
        if self.energy_grid < 1 {
            return Err(invalid("forest.energy_grid", "must be at least 1"));
        }
        Ok(())
    }

    /// Area of the populated substrate region, um^2.
    pub fn area(&self) -> f64 {
        let sides = if self.both_sides { 2.0 } else { 1.0 };
        sides * (self.radial_extent - self.min_gap) * self.axial_extent * 1e-6
    }

    pub fn tube_count(&self) -> u64 {
        (self.density * self.area()).round() as u64
    }

    pub fn energies(&self) -> Vec<f64> {
        uniform_grid(self.energy_window[0], self.energy_window[1], self.energy_grid)
    }
}

/// Semiconducting zigzag indices whose diameter lies in `range` (nm).
pub fn indices_in_diameter_range(params: &TBParams, range: [f64; 2]) -> Result<Vec<u32>> {
    let a = params.lattice.a();
    let out: Vec<u32> = (2..=((range[1] * PI / a).floor() as u32).max(2))
        .filter(|&n| {
            let d = a * n as f64 / PI;
            d >= range[0] && d <= range[1] && is_semiconducting(n)
        })
        .collect();
    if out.is_empty() {
        return Err(Error::NoTubesInDiameterRange { min_nm: range[0], max_nm: range[1] });
    }
    Ok(out)
}

/// Sampled tube: distance of closest approach to the fiber axis and index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForestSample {
    /// nm
    pub distance: f64,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestResult {
    pub energies: Vec<f64>,
    pub eta_total: Vec<f64>,
    pub std_error: Vec<f64>,
    pub tube_count: u64,
    pub samples: usize,
    pub indices: Vec<u32>,
}

impl ForestResult {
    /// `(energy, eta_total, std_error)` at the largest absorption.
    pub fn peak(&self) -> (f64, f64, f64) {
        let i = (0..self.eta_total.len())
            .max_by(|&a, &b| self.eta_total[a].total_cmp(&self.eta_total[b]))
            .expect("non-empty result");
        (self.energies[i], self.eta_total[i], self.std_error[i])
    }
}

/// Stratified draw: one distance per equal-width stratum, index uniform.
pub fn sample_forest(spec: &ForestSpec, fiber: &FiberSpec, indices: &[u32]) -> Vec<ForestSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.samples;
    let (lo, hi) = (fiber.radius + spec.min_gap, fiber.radius + spec.radial_extent);
    (0..m)
        .map(|i| {
            let u: f64 = rng.gen();
            let distance = lo + (hi - lo) * (i as f64 + u) / m as f64;
            let n = indices[rng.gen_range(0..indices.len())];
            ForestSample { distance, n }
        })
        .collect()
}

/// Monte Carlo estimate of the forest's total absorption at each energy.
///
/// With `N` tubes and `M` samples, `-ln(1 - eta_tot) = (N/M) sum_m U_m I_m / F`.
/// The standard error comes from differences of neighbouring strata.
pub fn forest_absorption(
    spec: &ForestSpec,
    fiber: &FiberSpec,
    params: &TBParams,
    cfg: &AbsorptionConfig,
) -> Result<ForestResult> {
    spec.validate()?;
    fiber.validate()?;
    cfg.validate()?;
    let count = spec.tube_count();
    if count == 0 {
        return Err(Error::EmptyForest);
    }
    let indices = indices_in_diameter_range(params, spec.diameter_range)?;
    let samples = sample_forest(spec, fiber, &indices);
    let energies = spec.energies();

    let absorbers: Vec<(u32, Absorber)> = indices
        .iter()
        .map(|&n| Ok((n, Absorber::new(&ZigzagTube::new(n, params.clone())?, cfg)?)))
        .collect::<Result<_>>()?;
    for (_, a) in &absorbers {
        a.prime(&energies)?;
    }
    let slot = |n: u32| absorbers.iter().position(|(k, _)| *k == n).expect("sampled index is known");
    let factory = FiberFieldFactory::new(*fiber, cfg.flux);
    let scale = count as f64 / samples.len() as f64;

    let per_energy: Vec<(f64, f64)> = energies
        .par_iter()
        .map(|&e| {
            let field = factory.fiber_field(e)?;
            let u: Vec<f64> = absorbers.iter().map(|(_, a)| a.u(e)).collect::<Result<_>>()?;
            let mut y = Vec::with_capacity(samples.len());
            for s in &samples {
                let path = NanotubePath::straight_at(s.distance, PI / 2.0, spec.tube_length)?;
                y.push(u[slot(s.n)] * intensity_integral(&path, &field, cfg) / cfg.flux);
            }
            let x = scale * y.iter().sum::<f64>();
            let var: f64 = y.chunks(2).filter(|c| c.len() == 2).map(|c| (c[0] - c[1]).powi(2)).sum();
            let eta = -(-x).exp_m1();
            Ok((eta, (1.0 - eta) * scale * var.sqrt()))
        })
        .collect::<Result<_>>()?;

    Ok(ForestResult {
        energies,
        eta_total: per_energy.iter().map(|p| p.0).collect(),
        std_error: per_energy.iter().map(|p| p.1).collect(),
        tube_count: count,
        samples: samples.len(),
        indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_examples() {
        let one = ArraySpec { count: 1, per_tube: PerTube::Uniform(0.3) };
        assert!((eta_total(&one).unwrap() - 0.3).abs() < 1e-15);
        let none = ArraySpec { count: 100, per_tube: PerTube::Uniform(0.0) };
        assert_eq!(eta_total(&none).unwrap(), 0.0);
        let n20k = ArraySpec { count: 20_000, per_tube: PerTube::Uniform(1.5e-4) };
        let e = eta_total(&n20k).unwrap();
        assert!(e > 0.95 && (e - (1.0 - (-3.0f64).exp())).abs() < 1e-3);
    }

    #[test]
    fn array_rejects_bad_input() {
        assert!(eta_total(&ArraySpec { count: 0, per_tube: PerTube::Uniform(0.1) }).is_err());
        assert!(eta_total(&ArraySpec { count: 2, per_tube: PerTube::Uniform(1.5) }).is_err());
        assert!(eta_total(&ArraySpec { count: 3, per_tube: PerTube::Each(vec![0.1, 0.2]) }).is_err());
    }

    #[test]
    fn tiny_probabilities_keep_precision() {
        let e = compose(&[1e-18, 1e-18]);
        assert!((e - 2e-18).abs() < 1e-30);
    }

    #[test]
    fn diameter_window_indices() {
        let idx = indices_in_diameter_range(&TBParams::default(), [0.5, 1.5]).unwrap();
        assert_eq!(idx, vec![7, 8, 10, 11, 13, 14, 16, 17, 19]);
        assert!(matches!(
            indices_in_diameter_range(&TBParams::default(), [0.20, 0.25]),
            Err(Error::NoTubesInDiameterRange { .. })
        ));
    }

    #[test]
    fn default_forest_tube_count() {
        let s = ForestSpec::default();
        assert!((s.area() - 2.0 * 0.49875 * 15.0).abs() < 1e-12);
        assert_eq!(s.tube_count(), 13_466);
    }

    #[test]
    fn sampling_is_seeded_and_stratified() {
        let spec = ForestSpec { samples: 50, ..ForestSpec::default() };
        let fiber = FiberSpec::default();
        let a = sample_forest(&spec, &fiber, &[7, 8]);
        assert_eq!(a, sample_forest(&spec, &fiber, &[7, 8]));
        let width = (500.0 - 1.25) / 50.0;
        for (i, s) in a.iter().enumerate() {
            let lo = 126.25 + width * i as f64;
            assert!(s.distance >= lo && s.distance <= lo + width);
        }
        let b = sample_forest(&ForestSpec { seed: 2, ..spec }, &fiber, &[7, 8]);
        assert_ne!(a, b);
    }

    #[test]
    fn empty_forest() {
        let spec = ForestSpec { density: 0.0, ..ForestSpec::default() };
        let r = forest_absorption(&spec, &FiberSpec::default(), &TBParams::default(), &AbsorptionConfig::default());
        assert_eq!(r.unwrap_err(), Error::EmptyForest);
    }
}
