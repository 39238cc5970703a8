//! HDR environment maps, the dual tone-mapped lighting encoding, perspective
//! crop generation, probe rendering and lighting-estimation metrics.

pub mod envmap;
pub mod error;
pub mod fusion;
pub mod image;
pub mod io;
pub mod metrics;
pub mod probe;
pub mod projection;
pub mod tonemap;

pub use envmap::{Direction, EnvironmentMap};
pub use error::{Error, Result};
pub use fusion::{FusionNet, TrainConfig};
pub use image::{Image, Rgb};
pub use metrics::MetricReport;
pub use probe::{Material, MaterialKind, ProbeImage};
pub use projection::{CameraSpec, Trajectory};
pub use tonemap::{DualToneMaps, ToneCurve};
