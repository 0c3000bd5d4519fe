//! Verification kernel for bipolar modules of multiplicative linear logic.
//!
//! Modules are built by composing elementary bipolar modules ([`Ebm`]) and
//! checked either by brute force over generalized switchings
//! ([`switching`]) or by the rewriting systems: big-step reduction for
//! correctness and acyclicity ([`bigstep`]), contraction for connectability
//! ([`contraction`]). [`session`] combines both to test compositions
//! incrementally.

pub mod bigstep;
pub mod contraction;
pub mod dot;
pub mod dsl;
pub mod generate;
pub mod model;
pub mod session;
pub mod switching;

pub use model::{
    compose_chain, Border, Cell, CellId, Ebm, Label, Link, ModelError, Module, Pole, PoleRef,
    SelfLinks,
};
