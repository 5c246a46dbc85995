//! Kernel mapping: a shared Cartesian reference kernel resampled into every
//! neighbourhood through precompiled bilinear gather tables.

mod conv;
mod selftest;
mod table;

pub use conv::{apply_knn_conv, mapped_weights, KernelBank};
pub use selftest::{
    dense_conv3x3, dense_equivalence, lattice_bundle, lattice_dense_deviation, lattice_signal, LatticeBundle, UNIFORM_A,
    UNIFORM_HALF_WIDTH,
};
pub use table::{
    build_kernel_map, neighborhood_reference_coords, render_mapped_kernel, KernelMapTable,
    ReferenceKernelSpec,
};
