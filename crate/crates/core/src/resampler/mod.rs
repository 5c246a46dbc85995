//! Sampling images through a sensor grid and rendering the result back.

mod fixations;
mod foveate;
mod image;
mod profile;

pub use fixations::{sample_fixations, FixationZone};
pub use foveate::{backproject, foveate, voronoi_labels, FixationSpec, FoveatedSignal};
pub use image::Image;
pub use profile::{local_resolution_profile, native_crossing, ResolutionSample};
