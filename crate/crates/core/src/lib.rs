pub mod engine;
pub mod harness;
pub mod logic;
pub mod modules;
pub mod oracle;
pub mod parser;
pub mod remote;
