//! Robust regression objectives and nearest-neighbour prediction built on
//! order-statistic selection.

mod knn;
mod regression;

pub use knn::{
    knn_classify, knn_classify_with, knn_predict, knn_predict_with, Euclidean, Manhattan, Metric, TrainingSet,
    Weighting, INVERSE_DISTANCE_DELTA,
};
pub use regression::{
    fit_elemental, least_squares, lms_from_residuals, lms_objective, load_regression_csv, lts_from_residuals,
    lts_objective, objective, read_regression_csv, residuals, trim_weights, ElementalFit, Estimator,
    RegressionProblem, TrimRule, TrimWeights, MAX_CONDITION,
};
