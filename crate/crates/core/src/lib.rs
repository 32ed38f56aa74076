// index loops read closer to the tensor notation
#![allow(clippy::needless_range_loop, clippy::should_implement_trait)]

pub mod classify;
pub mod corpus;
pub mod engine;
pub mod expr;
pub mod webfile;
