//! Least-squares SVM with a polynomial kernel, and the five-node gesture
//! decision tree built from it.

mod hierarchy;
mod kernel;
mod lssvm;

pub use hierarchy::{
    classify_gesture, FeatureKind, HierarchyConfig, HierarchyModel, NodeConfig, NodeModel, ProfileFeatures,
    Standardizer, HIERARCHY_FORMAT_VERSION,
};
pub use kernel::{dot, gram_matrix, kernel_eval, kernel_matrix, KernelParams};
pub use lssvm::{lssvm_decide, lssvm_system, lssvm_train, Decision, LsSvmModel};
