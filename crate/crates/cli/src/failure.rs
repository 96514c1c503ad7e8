use std::process::ExitCode;

use serde_json::json;
use vds_core::Error;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable inputs or malformed files.
    Usage(String),
    /// A processing stage returned an error.
    Stage { stage: &'static str, error: Error },
}

pub fn usage(error: Error) -> Failure {
    Failure::Usage(error.to_string())
}

pub fn stage(name: &'static str) -> impl Fn(Error) -> Failure {
    move |error| Failure::Stage { stage: name, error }
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Stage { .. } => 3,
        }
    }

    pub fn report(&self) -> ExitCode {
        let body = match self {
            Failure::Usage(message) => json!({"error": "usage", "message": message.trim_end(), "exit_code": 2}),
            Failure::Stage { stage, error } => {
                json!({"error": "stage", "stage": stage, "message": error.to_string(), "exit_code": 3})
            }
        };
        eprintln!("{body}");
        ExitCode::from(self.code())
    }
}
