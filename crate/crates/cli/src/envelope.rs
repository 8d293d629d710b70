use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Common;

pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;
pub const EXIT_FRAME_UNDEFINED: u8 = 3;

/// A run that ends with a nonzero exit code after its output is written.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

pub type RunResult<T> = Result<T, Failure>;

pub fn exit_code(e: &trimoment::Error) -> u8 {
    use trimoment::Error::*;
    match e {
        FrameUndefined { .. } => EXIT_FRAME_UNDEFINED,
        Internal(_) => EXIT_VERIFY_FAILED,
        _ => EXIT_INVALID_INPUT,
    }
}

pub fn error_object(e: &trimoment::Error) -> Value {
    let mut obj = json!({ "kind": e.kind(), "message": e.to_string() });
    if let trimoment::Error::FrameUndefined { magnitude } = e {
        obj["magnitude"] = json!(magnitude);
    }
    obj
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes).as_slice())
}

/// Raw bytes of a path, or of standard input for "-".
pub fn read_input(path: &str) -> RunResult<Vec<u8>> {
    let mut buf = Vec::new();
    let res = if path == "-" {
        io::stdin().read_to_end(&mut buf).map(|_| ())
    } else {
        fs::read(path).map(|b| buf = b)
    };
    res.map_err(|e| Failure::new(EXIT_INVALID_INPUT, format!("cannot read {path}: {e}")))?;
    Ok(buf)
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn write_output(path: Option<&Path>, text: &str) -> RunResult<()> {
    let res = match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::new(EXIT_INVALID_INPUT, format!("cannot write output: {e}")))
}

/// Common wrapper around every JSON result.
pub struct Envelope<'a> {
    pub command: &'a str,
    pub common: &'a Common,
    pub input_sha256: Option<String>,
    pub extra: Vec<(&'static str, Value)>,
}

impl Envelope<'_> {
    fn base(&self) -> Value {
        let mut v = json!({
            "tool": "trimoment",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.common.seed,
            "tolerances": { "rel": self.common.tolerance_rel, "abs": self.common.tolerance_abs },
            "input_sha256": self.input_sha256,
            "generated_unix": unix_now(),
        });
        for (k, x) in &self.extra {
            v[*k] = x.clone();
        }
        v
    }

    pub fn emit(&self, result: &impl Serialize) -> RunResult<()> {
        let mut v = self.base();
        v["result"] = serde_json::to_value(result).map_err(|e| Failure::new(EXIT_VERIFY_FAILED, e.to_string()))?;
        self.write(&v)
    }

    /// Writes an error object and returns the matching failure.
    pub fn emit_error(&self, e: &trimoment::Error) -> Failure {
        let mut v = self.base();
        v["error"] = error_object(e);
        if let Err(f) = self.write(&v) {
            return f;
        }
        Failure::new(exit_code(e), e.to_string())
    }

    fn write(&self, v: &Value) -> RunResult<()> {
        let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
        text.push('\n');
        write_output(self.common.output.as_deref(), &text)
    }
}
