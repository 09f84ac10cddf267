//! Dense matrix type, SVD and the proximal / projection operators.

mod mask;
mod matrix;
mod ops;
mod partial;
mod svd;

pub use mask::ObservationMask;
pub use matrix::DenseMatrix;
pub(crate) use ops::merge_on_mask;
pub use ops::{
    hard_threshold_entries, nuclear_norm, project_omega, project_omega_complement,
    relative_distance, soft_threshold, svt, svt_detailed, truncate_rank, SvtOutput,
};
pub use partial::{leading_svd, svt_warm, truncate_rank_warm, WarmStart};
pub use svd::{svd, SvdFactors, RANK_TOLERANCE};
