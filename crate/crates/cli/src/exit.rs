use std::fmt;

use ais_core::backend::BackendError;
use ais_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_TRANSPORT: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_SCHEMA: u8 = 3;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl Exit {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(EXIT_INVALID, message)
    }
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

pub fn backend_code(e: &BackendError) -> u8 {
    match e {
        e if e.is_transport() => EXIT_TRANSPORT,
        BackendError::VersionMismatch { .. } | BackendError::InvalidResponse(_) => EXIT_SCHEMA,
        _ => EXIT_INVALID,
    }
}

pub fn core_code(e: &Error) -> u8 {
    match e.root() {
        Error::Backend(b) => backend_code(b),
        Error::Manifest(_) => EXIT_SCHEMA,
        _ => EXIT_INVALID,
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        Exit::new(core_code(&e), e.to_string())
    }
}

impl From<BackendError> for Exit {
    fn from(e: BackendError) -> Self {
        Exit::new(backend_code(&e), e.to_string())
    }
}
