pub mod classify;
pub mod cli;
pub mod engine;
pub mod eval;
pub mod llm;
pub mod model;
