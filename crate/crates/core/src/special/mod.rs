//! Special functions needed by the fiber-mode solver.

mod bessel;

pub use bessel::{bessel_j012, bessel_k012, j0, j1, j1_prime, j2, k0, k1, k1_prime, k2};
