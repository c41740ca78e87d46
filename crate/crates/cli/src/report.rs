use std::io::{self, Write};

use serde::Serialize;
use serde_json::value::RawValue;

use ccp_core::CcpError;

/// Why a command stopped early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(CcpError),
    Io(io::Error),
}

impl From<CcpError> for Failure {
    fn from(e: CcpError) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_validation() => 3,
            Failure::Core(CcpError::Overflow { .. } | CcpError::TooLarge { .. }) => 4,
            Failure::Core(_) | Failure::Io(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "Usage",
            Failure::Core(e) => e.kind(),
            Failure::Io(_) => "Io",
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<u64>,
    /// Closed-form state count, when the engine has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_states: Option<Option<Box<RawValue>>>,
}

#[derive(Serialize)]
struct ErrorReport {
    schema: &'static str,
    command: &'static str,
    error: ErrorBody,
}

pub fn write_error(out: &mut impl Write, schema: &'static str, command: &'static str, f: &Failure) -> io::Result<()> {
    let (cap, predicted_states) = match f {
        Failure::Core(CcpError::Overflow { cap, predicted }) => (
            Some(*cap),
            // raw digits keep the count exact beyond 2^53
            Some(
                predicted
                    .as_ref()
                    .map(|p| RawValue::from_string(p.to_string()).expect("decimal digits")),
            ),
        ),
        _ => (None, None),
    };
    let report = ErrorReport {
        schema,
        command,
        error: ErrorBody {
            kind: f.kind(),
            message: f.message(),
            cap,
            predicted_states,
        },
    };
    serde_json::to_writer(&mut *out, &report)?;
    writeln!(out)
}

pub fn write_json(out: &mut impl Write, value: &impl Serialize) -> Result<(), Failure> {
    serde_json::to_writer(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(out: &mut impl Write, rows: impl IntoIterator<Item = T>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Failure::Io(io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
