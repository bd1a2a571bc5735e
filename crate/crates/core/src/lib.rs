//! Geometric instance partitioning of STEP B-Rep models.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod analysis;
pub mod brep;
pub mod carrier;
pub mod eval;
pub mod geom;
pub mod partition;
pub mod pipeline;
pub mod step;
pub mod synth;
pub mod tessellate;
