//! Sweep orchestration, configuration, checkpointing, and diagnostic
//! emission for the Floquet transmon loss simulator.

pub mod checkpoint;
pub mod compare;
pub mod config;
pub mod dump;
pub mod sweep;
