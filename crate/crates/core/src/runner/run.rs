use super::{format_number, Experiment, FieldConfig, Metadata, RunConfig, RunnerError, SweepResult, VERSION};
use crate::absorption::{uniform_grid, Absorber, FiberFieldFactory, FieldFactory, PlaneWaveFactory};
use crate::constants::ev_to_wavelength_nm;
use crate::detector::{eta_total, forest_absorption, ArraySpec, PerTube};
use crate::fiber::{cylindrical_to_cartesian, mode_profile, solve_mode};
use crate::nanotube::ZigzagTube;
use crate::path::{optimal_winding, NanotubePath, PathKind};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

fn progress(done: &AtomicUsize, total: usize, what: &str) {
    let k = done.fetch_add(1, Ordering::Relaxed) + 1;
    eprintln!("[{k}/{total}] {what}");
}

fn field_factory(cfg: &RunConfig) -> Box<dyn FieldFactory> {
    match cfg.field {
        FieldConfig::Fiber { f, p } => Box::new(FiberFieldFactory::new(cfg.fiber, cfg.absorption.flux).with_labels(f, p)),
        FieldConfig::PlaneWave { area, polarization } => {
            Box::new(PlaneWaveFactory { flux: cfg.absorption.flux, area, polarization })
        }
    }
}

fn tube(cfg: &RunConfig) -> Result<ZigzagTube, RunnerError> {
    let n = cfg.n.ok_or_else(|| RunnerError::Config("missing key `n`".into()))?;
    Ok(ZigzagTube::new(n, cfg.tight_binding.params()?)?)
}

fn path(cfg: &RunConfig, kind: PathKind, length: f64) -> crate::Result<NanotubePath> {
    let geo = cfg.geometry.geometry();
    match kind {
        PathKind::Straight { angle } => NanotubePath::straight(&cfg.fiber, &geo, angle, length),
        PathKind::Helix { winding } => NanotubePath::helix(&cfg.fiber, &geo, winding, length),
    }
}

/// Run the configured experiment. Deterministic for a given config.
pub fn run_experiment(cfg: &RunConfig) -> Result<SweepResult, RunnerError> {
    cfg.validate()?;
    let mut extras = BTreeMap::new();
    let (axis_label, axis, eta_label, eta, std_error) = match cfg.experiment {
        Experiment::Spectrum => {
            let absorber = Absorber::new(&tube(cfg)?, &cfg.absorption)?;
            let [lo, hi] = cfg.spectrum.energy_range;
            let energies = uniform_grid(lo, hi, cfg.spectrum.points);
            let p = path(cfg, cfg.geometry.path, cfg.geometry.length)?;
            eprintln!("spectrum: {} energies", energies.len());
            let eta = absorber.eta_spectrum(&p, field_factory(cfg).as_ref(), &energies)?;
            for (i, e) in absorber.tube().edge_energies(1e-9).iter().take(2).enumerate() {
                extras.insert(format!("band_edge_{}_ev", i + 1), *e);
            }
            ("energy_eV".to_string(), energies, "eta".to_string(), eta, None)
        }
        Experiment::SweepLength | Experiment::SweepAngle | Experiment::SweepWinding => {
            let absorber = Absorber::new(&tube(cfg)?, &cfg.absorption)?;
            let values = cfg.sweep.values()?;
            let factory = field_factory(cfg);
            absorber.prime(&cfg.absorption.energies())?;
            let (label, paths): (&str, Vec<NanotubePath>) = match cfg.experiment {
                Experiment::SweepLength => (
                    "length_nm",
                    values.iter().map(|&l| path(cfg, cfg.geometry.path, l)).collect::<crate::Result<_>>()?,
                ),
                Experiment::SweepAngle => (
                    "angle_rad",
                    values
                        .iter()
                        .map(|&a| path(cfg, PathKind::Straight { angle: a }, cfg.geometry.length))
                        .collect::<crate::Result<_>>()?,
                ),
                _ => (
                    "winding_per_nm",
                    values
                        .iter()
                        .map(|&w| path(cfg, PathKind::Helix { winding: w }, cfg.geometry.length))
                        .collect::<crate::Result<_>>()?,
                ),
            };
            if cfg.experiment == Experiment::SweepWinding {
                if let FieldConfig::Fiber { f, p } = cfg.field {
                    // polarisation match at the first band edge
                    let gap = absorber.tube().bandgap();
                    let mode = solve_mode(&cfg.fiber, ev_to_wavelength_nm(gap), f, p)?;
                    let rn = cfg.geometry.geometry().center_radius(&cfg.fiber);
                    extras.insert("optimal_winding_per_nm".into(), optimal_winding(&mode, &cfg.fiber, rn)?);
                    extras.insert("optimal_winding_energy_ev".into(), gap);
                }
            }
            let done = AtomicUsize::new(0);
            let eta = paths
                .par_iter()
                .zip(&values)
                .map(|(p, v)| {
                    let r = absorber.eta_bar(p, factory.as_ref());
                    progress(&done, values.len(), &format!("{label} = {v}"));
                    r
                })
                .collect::<crate::Result<Vec<f64>>>()?;
            (label.to_string(), values, "eta_bar".to_string(), eta, None)
        }
        Experiment::Forest => {
            let mut spec = cfg.forest.clone();
            spec.seed = cfg.seed;
            eprintln!("forest: {} tubes, {} samples, {} energies", spec.tube_count(), spec.samples, spec.energy_grid);
            let r = forest_absorption(&spec, &cfg.fiber, &cfg.tight_binding.params()?, &cfg.absorption)?;
            extras.insert("tube_count".into(), r.tube_count as f64);
            extras.insert("samples".into(), r.samples as f64);
            ("energy_eV".to_string(), r.energies, "eta_total".to_string(), r.eta_total, Some(r.std_error))
        }
        Experiment::Array => {
            let per_tube = match &cfg.array.per_tube {
                Some(p) => p.clone(),
                None => {
                    let absorber = Absorber::new(&tube(cfg)?, &cfg.absorption)?;
                    let p = path(cfg, cfg.geometry.path, cfg.geometry.length)?;
                    let e = absorber.eta_bar(&p, field_factory(cfg).as_ref())?;
                    extras.insert("eta_bar_per_tube".into(), e);
                    PerTube::Uniform(e)
                }
            };
            let eta = cfg
                .array
                .counts
                .iter()
                .map(|&count| {
                    let per_tube = match &per_tube {
                        PerTube::Each(v) if (count as usize) < v.len() => PerTube::Each(v[..count as usize].to_vec()),
                        other => other.clone(),
                    };
                    eta_total(&ArraySpec { count, per_tube })
                })
                .collect::<crate::Result<Vec<f64>>>()?;
            let axis = cfg.array.counts.iter().map(|&c| c as f64).collect();
            ("tubes".to_string(), axis, "eta_total".to_string(), eta, None)
        }
    };
    Ok(SweepResult {
        axis_label,
        axis,
        eta_label,
        eta,
        std_error,
        metadata: Metadata { config: cfg.clone(), version: VERSION.to_string(), seed: cfg.seed, extras },
    })
}

/// Cartesian mode components on a square grid in the transverse plane, CSV.
pub fn dump_mode(cfg: &RunConfig) -> Result<String, RunnerError> {
    let (f, p) = match cfg.field {
        FieldConfig::Fiber { f, p } => (f, p),
        FieldConfig::PlaneWave { .. } => return Err(RunnerError::Config("--dump-mode needs a fiber field".into())),
    };
    let s = &cfg.spectrum;
    if s.mode_grid < 2 || !(s.mode_extent > 0.0) {
        return Err(RunnerError::Config("spectrum.mode_grid >= 2 and mode_extent > 0 required".into()));
    }
    let mode = solve_mode(&cfg.fiber, s.mode_wavelength, f, p)?;
    let half = s.mode_extent * cfg.fiber.radius;
    let grid = uniform_grid(-half, half, s.mode_grid);
    let mut out = String::new();
    writeln!(out, "# wavelength_nm = {}", s.mode_wavelength).unwrap();
    writeln!(out, "# effective_index = {}", mode.effective_index()).unwrap();
    writeln!(out, "x_nm,y_nm,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im,intensity").unwrap();
    for &y in &grid {
        for &x in &grid {
            let phi = y.atan2(x);
            let phase = Complex64::cis(p as f64 * phi);
            let e = cylindrical_to_cartesian(mode_profile(&mode, &cfg.fiber, x.hypot(y)).map(|c| c * phase), phi);
            let i: f64 = e.iter().map(|c| c.norm_sqr()).sum();
            let cols: Vec<String> = [x, y, e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, i]
                .iter()
                .map(|v| format_number(*v))
                .collect();
            writeln!(out, "{}", cols.join(",")).unwrap();
        }
    }
    Ok(out)
}
