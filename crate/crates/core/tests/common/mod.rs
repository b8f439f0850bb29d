#![allow(dead_code)]

pub mod hyperbolic;
pub mod tables;
