//! Shape-function extraction for oscillatory signals with intra-wave
//! frequency modulation.
//!
//! A signal is modelled as `f(t) = a(t)·s(θ(t)) + r(t)` with a slowly varying
//! envelope `a`, a smooth increasing phase `θ` and a 2π-periodic shape `s`.
//! Given `θ` (or an estimate of it), the signal is resampled to a uniform
//! grid in normalized phase, split into harmonic bands, and the envelope and
//! shape are recovered from the top singular pair of the band matrix.
//!
//! ```
//! use shapewave::datasets::{gen_example1, NoiseSpec};
//! use shapewave::{extract_shape, validate_phase, ExtractOptions};
//!
//! let ex = gen_example1(2048, NoiseSpec::clean()).unwrap();
//! let phase = validate_phase(&ex.signal, ex.phases.clone()).unwrap();
//! let res = extract_shape(&ex.signal, &phase, &ExtractOptions::default()).unwrap();
//! assert_eq!(res.l_theta, 20);
//! assert!(res.relative_residual(&ex.signal) < 0.05);
//! ```

pub mod cli;
pub mod datasets;
pub mod distance;
pub mod error;
pub mod extract;
pub mod local;
pub mod phase;
pub mod signal;
pub mod spline;
pub mod theta;

pub use distance::shape_distance;
pub use error::{Error, Result};
pub use extract::{extract_shape, rank_one_fit, ExtractOptions, Rank1Fit};
pub use local::{extract_shape_track, LocalShape, ShapeTrack, WindowSpec};
pub use phase::{estimate_phase, PhaseEstimateConfig};
pub use signal::{
    validate_phase, validate_signal, Envelope, ExtractionResult, PhaseFunction, ShapeFunction,
    Signal,
};
