#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod cli;
pub mod config;
pub mod denominator;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod modal;
pub mod problem;
pub mod quadrature;
pub mod roots;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
