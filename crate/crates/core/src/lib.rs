// SPDX-License-Identifier: Apache-2.0

//! Event-driven full-system power simulator for always-on wearable devices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod scenario;
pub mod sim;
pub mod power;
pub mod dse;
pub mod bundled;
pub mod report;
pub mod cli;
