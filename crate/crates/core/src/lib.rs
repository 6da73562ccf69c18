#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod geometry;
pub mod math;
pub mod rng;
mod spatial;
pub mod layout;
pub mod kinematics;
pub mod tof;
pub mod sc;
pub mod analysis;
pub mod protocol;
pub mod simulate;
pub mod fixtures;
