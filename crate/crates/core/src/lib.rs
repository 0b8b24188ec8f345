//! Circle packings of planar triangulations and random walks on them.

pub mod map;
pub mod hypgeo;
pub mod packer;
pub mod samplers;
pub mod rng;
pub mod walker;
pub mod analysis;
pub mod io;
pub mod render;
