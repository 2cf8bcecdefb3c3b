//! Complex dimensions and fractal tube formulas for self-similar tilings
//! and fractal sprays.
//!
//! The crate evaluates scaling zeta functions `1/(1 - sum r_j^s)`, locates
//! their poles (the scaling complex dimensions), assembles the tubular zeta
//! function of a tiling from Steiner-like generator data, and sums its
//! residues into the truncated tube formula `V(T, eps)`. Every formula value
//! can be cross-validated against an exact word-sum oracle that enumerates
//! tiles up to the saturation depth and closes the tail with a geometric
//! series.

// `!(x > 0.0)` rejects NaN along with nonpositive values; `x <= 0.0` would
// accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builtins;
pub mod error;
pub mod geometry;
pub mod ifs;
pub mod steiner;
pub mod tube;
pub mod zeta;

pub use builtins::Builtin;
pub use error::{Error, Result};
pub use geometry::{montecarlo_tube_area, ConvexPolygon, ShapeSampler, TubeEstimate};
pub use ifs::{Generator, GeneratorSpec, SelfSimilarSystem, Word, WordEnumeration};
pub use steiner::{SteinerKind, SteinerRep};
pub use tube::{
    epsilon_grid, string_adapter, Averaging, CurveSource, FiniteSpray, MeasurabilityReport,
    StringModel, TilingModel, TubeCurve, TubeExpansion, TubeFormulaValue,
};
pub use zeta::{
    detect_lattice, similarity_dimension, ComplexDimension, LatticeClass, LatticeStructure,
    ScalingZeta, Window,
};

pub use num_complex::Complex64;
