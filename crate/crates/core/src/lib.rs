//! Numerical laboratory for positive solutions of `Δ_p u + a u^σ = 0` on
//! radial model spaces.
//!
//! The [`thresholds`] module holds the exponent windows, [`solver`] shoots
//! radial profiles, [`verify`] measures the integral and pointwise
//! inequalities on them, and [`sweep`] classifies `(p, σ)` grids.
//!
//! ```
//! use plaplab::geometry::ModelSpace;
//! use plaplab::solver::{first_zero, solve_radial, ShootingConfig};
//! use plaplab::thresholds::EquationParams;
//!
//! let params = EquationParams::new(3, 2.0, 1.0, 1.0)?;
//! let sol = solve_radial(&params, &ModelSpace::euclidean(3)?, &ShootingConfig::new(1.0, 4.0))?;
//! assert!((first_zero(&sol).unwrap() - std::f64::consts::PI).abs() < 1e-4);
//! # Ok::<(), plaplab::error::LabError>(())
//! ```

pub mod error;
pub mod geometry;
pub mod numerics;
pub mod solver;
pub mod sweep;
pub mod thresholds;
pub mod verify;

// Book chapters compiled as doctests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/thresholds.md")]
    mod thresholds {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/bochner.md")]
    mod bochner {}
    #[doc = include_str!("../../../book/src/moser.md")]
    mod moser {}
    #[doc = include_str!("../../../book/src/gradient.md")]
    mod gradient {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
