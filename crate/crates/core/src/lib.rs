pub mod geometry;
pub mod grasping;
pub mod harness;
pub mod seeds;
pub mod selection;
pub mod simcam;
pub mod viewmap;
