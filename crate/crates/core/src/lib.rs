//! Directional trend estimation on the unit sphere.
//!
//! Noisy unit vectors `y_1, ..., y_p` observed in time order are smoothed by
//! symmetric linear smoothers `A`, giving fitted means `AY` whose rows are
//! normalised back onto the sphere. Within a family `A(t)` the parameter is
//! chosen by minimising an estimate of the risk computed from the data alone.
//!
//! ```
//! use dirtrend::{families::PlsFamily, model::gamma2_hat, select::*, synth::*};
//!
//! let cfg = SimulationConfig { p: 60, kappa: 200.0, seed: 1 };
//! let (data, _truth) = generate_dataset(&wobble(), &cfg).unwrap();
//! let pls = PlsFamily::new(60, 2, 1000.0).unwrap();
//! let sel = minimize_estimated_risk(&pls, &data, gamma2_hat(&data), &SelectionConfig::default()).unwrap();
//! assert!(sel.estimated_risk < gamma2_hat(&data));
//! ```

pub mod cli;
pub mod error;
pub mod families;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod model;
pub mod plot;
pub mod select;
pub mod synth;

pub use error::{Error, Result};
pub use families::{FamilySpec, FitResult, SmootherFamily};
pub use geometry::{SphericalPoint, UnitVector3};
pub use model::{DirectionData, MeanField};
pub use select::{RiskReport, SelectionConfig};
