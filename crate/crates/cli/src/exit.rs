//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 external backend failure.

use std::fmt;

pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;
pub const BACKEND: u8 = 3;

/// An error tagged with the process exit code it should produce.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for Coded {}

pub trait ResultExt<T> {
    fn usage(self) -> Result<T, Coded>;
    fn data(self) -> Result<T, Coded>;
    fn backend(self) -> Result<T, Coded>;
}

impl<T, E: Into<anyhow::Error>> ResultExt<T> for Result<T, E> {
    fn usage(self) -> Result<T, Coded> {
        self.map_err(|e| Coded {
            code: USAGE,
            error: e.into(),
        })
    }

    fn data(self) -> Result<T, Coded> {
        self.map_err(|e| Coded {
            code: DATA,
            error: e.into(),
        })
    }

    fn backend(self) -> Result<T, Coded> {
        self.map_err(|e| Coded {
            code: BACKEND,
            error: e.into(),
        })
    }
}

/// Exit code for `err`; untagged errors count as data errors.
pub fn code_of(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<Coded>())
        .map(|c| c.code)
        .unwrap_or(DATA)
}
