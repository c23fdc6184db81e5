//! Cycle-level model of a graph accelerator built around a segmented
//! parallel accumulator.

pub mod accumulator;
pub mod algorithms;
pub mod graph;
pub mod memory;
pub mod preprocess;
pub mod scheduler;
pub mod simulator;
