use std::fmt;

use laxforge::LaxError;

/// A run that produced no verdict: bad configuration (exit 1) or a
/// computation that broke down, such as a pole or a stalled solver (exit 2).
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Math(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Math(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) | Failure::Math(m) => f.write_str(m),
        }
    }
}

impl From<LaxError> for Failure {
    fn from(e: LaxError) -> Failure {
        match e {
            LaxError::InvalidArgument(_) | LaxError::Parse(_) | LaxError::JetOrder(_) => Failure::Config(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}
