//! Grid-aligned self-affine carpets and their dimension theory.
//!
//! Construct carpets from an `m`-by-`n` grid and a digit set, evaluate every
//! closed-form dimension of the carpet and of self-affine measures on it,
//! and cross-validate each formula against independent numerical oracles:
//! exact covering counts, pixel box-counting on the rational grid, Monte
//! Carlo local dimensions, and exact moment sums.
//!
//! The library is organized around small pure modules:
//!
//! - [`carpet`]: validated specs, column structure, cylinders, approximate
//!   squares, the coding map;
//! - [`dims`]: the closed-form dimension formulas, the p-average family,
//!   interpolation spectra, projections;
//! - [`measure`]: self-affine measures, entropies, the exact-dimension
//!   formula, the maximal measure, sampling;
//! - [`subsystem`]: uniform-fibres subsystems and their convergence to the
//!   Hausdorff dimension;
//! - [`numerics`]: the independent estimators and counting kernels;
//! - [`io`]: spec files, CSV, PGM rasters.
//!
//! Everything is immutable after construction and safe to share across
//! threads; the few parallel kernels merge deterministically, so results
//! never depend on thread count.

pub mod carpet;
pub mod dims;
pub mod error;
pub mod io;
pub mod measure;
pub mod numerics;
pub mod subsystem;

pub use carpet::{
    ApproxSquare, CarpetSpec, ColumnProfile, CylinderRect, Digit, SymbolicWord, DEFAULT_ENUM_CAP,
};
pub use dims::{
    dimension_report, modified_lower_dimension, p_average_dimension, projection_dimension,
    spectrum_curve, spectrum_value, DimensionReport, SpectrumCurve, SpectrumKind,
};
pub use error::{Error, Result};
pub use io::{
    parse_spec, render_measure, render_set, serialize_measure, serialize_spec, write_csv,
    RasterImage, ToCsv,
};
pub use measure::{EntropyPair, SelfAffineMeasure, DEFAULT_SEED};
pub use numerics::{
    approx_square_count, box_dimension_estimate, coarse_multifractal_histogram,
    legendre_transform, lq_dimension_reading, lq_moment_sum, lq_spectrum, lq_tau,
    pixel_box_count, projection_box_estimate, ApproxSquareCount, Estimate, Histogram,
    LegendrePoint, LqCurve, Regression,
};
pub use subsystem::{
    convergence_table, convergence_table_mcmullen, floor_counts, materialize_subsystem,
    subsystem_counts, ConvergenceRow, ConvergenceTable, FloorCounts, SubsystemCounts,
};
