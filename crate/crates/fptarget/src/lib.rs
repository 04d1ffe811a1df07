//! File formats, external matchers, and pipeline orchestration on top of
//! [`fptarget_core`].
//!
//! The core crate owns geometry and statistics; this one owns everything
//! that touches the filesystem or another process: STL/OBJ/PGM/PNG codecs,
//! impression-set loading, the command-template matcher, the end-to-end
//! pipeline with its hashed manifest, and the `fptarget` binary.

pub mod config;
pub mod matcher;
pub mod obj;
pub mod pgm;
pub mod pipeline;
pub mod report;
pub mod sets;
pub mod stl;

pub use fptarget_core as core;
