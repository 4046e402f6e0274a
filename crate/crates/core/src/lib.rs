pub mod apps;
pub mod autodiff;
pub mod cli;
pub mod engine;
pub mod ground;
pub mod infer;
pub mod lang;
pub mod meta;

pub use engine::{Engine, Error, Result, Valuation};
