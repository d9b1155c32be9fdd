// SPDX-License-Identifier: Apache-2.0

pub mod arbitration;
pub mod cli;
pub mod constructor;
pub mod depth;
pub mod error;
pub mod fixtures;
pub mod logic;
pub mod profile;
pub mod scheme;
pub mod simulator;

pub use error::{Error, Result};
