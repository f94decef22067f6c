//! Signal conditioning, fiducial delineation and segmentation.

pub mod delineate;
pub mod denoise;
pub mod segment;

pub use delineate::{delineate, CardiacCycle, DelineationConfig};
pub use denoise::{denoise, denoise_with, DenoiseConfig};
pub use segment::{segment, Segment, SegmentLabel, SegmentationConfig};
