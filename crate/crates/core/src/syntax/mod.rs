//! Abstract syntax, parser and printer for lc-programs.

pub mod ast;
mod lexer;
mod parser;
mod printer;

use thiserror::Error;

pub use ast::*;
pub use parser::parse_program;
pub use printer::{print_program, quote_rational};

pub use crate::lcsem::setting::signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: unexpected {found}, expected {}", .expected.join(" or "))]
    Syntax {
        line: usize,
        column: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("{line}:{column}: {message}")]
    Semantic {
        line: usize,
        column: usize,
        message: String,
    },
}
