//! Receptive-field analysis of stacked kNN layers, and the transformer FLOPs
//! model used for the efficiency comparison.

mod fit;
mod flops;
mod rf;
mod stack;

pub use fit::{linear_fit, powerlaw_fit, LinearFit, PowerLawFit};
pub use flops::{fixation_flops_curve, vit_flops, FlopsBreakdown, FlopsRow, VitFlopsConfig};
pub use rf::{histogram, max_extent, rf_diameter_profile, rf_shape_fit, DiameterStatistic, LayerRfProfile, RfRecord, ShapeFit};
pub use stack::{reachability, rf_backproject, Layer, LayerOp, LayerStack, RfTrace};

/// Five-layer stack used for the RF studies: two convolutions, a pooling
/// stage, two more convolutions.
pub const TOY_STACK: [LayerOp; 5] = [
    LayerOp::Conv { k: 25, stride: 2 },
    LayerOp::Conv { k: 9, stride: 1 },
    LayerOp::Pool { k: 9, stride: 2 },
    LayerOp::Conv { k: 9, stride: 1 },
    LayerOp::Conv { k: 9, stride: 1 },
];
