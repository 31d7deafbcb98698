// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

// Guards such as `!(t > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auxiliary;
pub mod classifier;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod lattice;
pub mod model;
pub mod numkernel;
pub mod ode;
pub mod output;
pub mod trajectory;

pub use error::{Error, Result};
