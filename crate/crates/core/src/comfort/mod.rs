//! Perceptually significant disparity features and the visual comfort score.

mod features;
mod fit;
mod model;
mod significance;

pub use features::{
    extract_features, features_from_angular, FeatureExtractor, FeatureParams, FeatureVector, BASE_FEATURES,
};
pub use fit::{fit_model, load_calibration_csv, save_calibration_csv, LabeledSample};
pub use model::{
    comfort_score, depth_richness, ComfortModel, ComfortModelFile, COMFORT_SCHEMA_VERSION, MOS_MAX, MOS_MIN,
};
pub use significance::{significance_from_angular, significance_map, SignificanceMap};
