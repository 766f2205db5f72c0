//! Verification of safety properties by supercompilation of a small
//! first-order functional language.

pub mod cli;
pub mod config;
pub mod driver;
pub mod encoding;
pub mod selfint;
pub mod semantics;
pub mod syntax;
pub mod verify;
pub mod whistle;
