//! Elementary affine logic type inference for type-free lambda terms.

pub mod cli;
pub mod eal;
pub mod export;
pub mod lambda;
pub mod neal;
pub mod oracle;
pub mod pipeline;
pub mod simple;
pub mod solver;
pub mod synthesis;
