//! Reactive synthesis for temporal specifications over linear integer and
//! rational arithmetic.

pub mod logic;
pub mod arith;
pub mod spec;
pub mod abstraction;
pub mod game;
pub mod partition;
pub mod provider;
pub mod runtime;
pub mod bench;
