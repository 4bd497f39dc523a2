//! Occupation-product wavefunction ansatz: features, fitting and prediction.

mod features;
mod fit;
mod model;

pub use features::{build_features, feature_count, FeatureMatrix};
pub use fit::{
    fit_ansatz, fit_magnitudes, fit_phase, phase_sign, predict, predicted_coefficients, signed_prediction, FitConfig,
    MagnitudeFit, PoissonObjective, RefineObjective, Step1Response,
};
pub use model::{AnsatzModel, MagnitudeTarget};
