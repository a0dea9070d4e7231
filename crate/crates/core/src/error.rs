use thiserror::Error;

/// Domain errors raised by the physics modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("overlap singularity: 1 - u|phi| = {denominator:e} is not positive")]
    OverlapSingularity { denominator: f64 },

    #[error("k-point ({kx}, {ky}) nm^-1 is at a Dirac point (|phi| = {magnitude:e}); band coefficients are undefined")]
    DiracPoint { kx: f64, ky: f64, magnitude: f64 },

    #[error("zigzag index n = {0} is not supported (need n >= 2)")]
    InvalidChiralIndex(u32),

    #[error("({0},0) nanotube is metallic; absorption is only modelled for semiconducting tubes")]
    MetallicTube(u32),

    #[error("photon energy {energy_ev} eV is outside the model's validity range (0, {max_ev}] eV")]
    EnergyOutOfRange { energy_ev: f64, max_ev: f64 },

    #[error("no guided HE11 mode found for R = {radius_nm} nm at lambda = {wavelength_nm} nm")]
    NoGuidedMode { radius_nm: f64, wavelength_nm: f64 },

    #[error("fiber is multi-mode at lambda = {wavelength_nm} nm: {roots} roots of the HE eigenvalue equation (V = {v_number:.4})")]
    MultiMode { wavelength_nm: f64, roots: usize, v_number: f64 },

    #[error("axial mode field vanishes at r = {r_nm} nm; optimal winding undefined")]
    ZeroAxialField { r_nm: f64 },

    #[error("forest region and density yield no nanotubes")]
    EmptyForest,

    #[error("no semiconducting zigzag tube has a diameter in [{min_nm}, {max_nm}] nm")]
    NoTubesInDiameterRange { min_nm: f64, max_nm: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
