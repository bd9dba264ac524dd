//! Qualitative analysis of five quadratic planar vector-field families.
//!
//! The crate classifies finite and infinite critical points, partitions the
//! parameter space of the damped family into regions and detects bifurcations
//! along parameter paths, approximates invariant manifolds at saddles, checks
//! first integrals and closed-form integral curves, and renders phase
//! portraits on a window or on the Poincaré disk.

pub mod algebraic;
pub mod bifurcate;
pub mod classify;
pub mod compactify;
pub mod dynamics;
pub mod error;
pub mod families;
pub mod numeric;
pub mod poly;
pub mod report;

pub use error::{Error, Result};
pub use families::{build_family, derived_params, FamilySpec};
pub use poly::{Poly2, PowerSeries1, VectorField2};

/// Order-preserving map over a slice, in parallel when the `parallel`
/// feature is enabled.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
