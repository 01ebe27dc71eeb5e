//! Matrix Wiener–Hopf factorization of the randomized additive process.

mod factor;
mod generator;
mod roots;

pub use factor::{
    assemble_factorization, assemble_factorization_with, inf_transform, joint_transform, killed_moment,
    null_vector, sup_transform, FactorOptions, OneSidedFactor, Side, SpectralFactorization, MAX_COND,
    SPECTRAL_COND_LIMIT,
};
pub use generator::{build_generator, det_k_product, GeneratorBlocks, StateLayout};
pub use roots::{find_roots, period_roots, PeriodRoots, RootOptions};
