#![allow(dead_code)]
pub mod runs;
pub mod zcs;
