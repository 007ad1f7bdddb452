//! Textual front end for valuation-network propagation: the document format,
//! its interpreter, the REPL, and table rendering.

pub mod ast;
pub mod parse;
pub mod render;
pub mod repl;
pub mod runner;
pub mod validate;

pub use ast::{DenseValue, FocalSpec, Location, MassEntry, NetworkDocument, Statement};
pub use parse::{parse, ParseError};
pub use render::{render, Footer};
pub use runner::{ExecError, Output, Session, SessionOptions};
