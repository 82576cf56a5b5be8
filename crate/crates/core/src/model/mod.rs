//! Set classifier, dense fixed-grid baseline and model files.

mod baseline;
mod persist;
mod set_model;

pub use baseline::{baseline_forward, DenseBaselineModel, StageTimes};
pub use persist::{
    any_from_json, baseline_to_json, load_any, load_baseline, load_model, model_to_json, save_baseline,
    save_model, AnyModel, FORMAT_VERSION,
};
pub use set_model::{argmax, contributing_count, pool, PoolResult, SetArchitecture, SetModel};
