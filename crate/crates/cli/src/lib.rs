//! Library side of the `ncw` command-line tool.

pub mod commands;
pub mod dsl;
pub mod expr;
pub mod report;

use std::fmt;

use expr::ParseError;

/// Any problem with the user's input; the tool exits with status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError(String);

impl InputError {
    pub fn new(message: impl Into<String>) -> Self {
        InputError(message.into())
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

impl From<ParseError> for InputError {
    fn from(e: ParseError) -> Self {
        InputError(e.to_string())
    }
}

impl From<ncw_core::Error> for InputError {
    fn from(e: ncw_core::Error) -> Self {
        InputError(e.to_string())
    }
}
