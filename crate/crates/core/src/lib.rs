//! Analysis, questioning, dialogue scoring and assessment for MiniLang
//! submissions.

pub mod assessment;
pub mod config;
pub mod dialogue;
pub mod facts;
pub mod kc;
pub mod questions;
pub mod text;

pub use kc::{Kc, MisconceptionTag};
