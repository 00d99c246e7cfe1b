//! Synthetic contract generator with known effects.

pub mod config;
pub mod generate;
pub mod prefectures;
pub mod truth;

pub use config::{DgpConfig, PrefectureOverride, PrefectureSpec, ReimbursementSpec, WageMixture, WagePmf};
pub use generate::{generate, PostingSampler, SimOutput};
pub use truth::{true_cell_means, GroundTruth, TrueCell};
