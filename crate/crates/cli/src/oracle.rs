//! Count oracles selectable from the command line.

use std::io::Write;
use std::process::{Command, Stdio};

use num_bigint::BigInt;

use cqcount::recovery::CountOracle;
use cqcount::text::serialize_database;
use cqcount::{Database, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleSpec {
    Brute,
    /// Shell command: reads a `.db` document on stdin, prints one decimal.
    Command(String),
}

impl std::str::FromStr for OracleSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "brute" {
            Ok(OracleSpec::Brute)
        } else if let Some(cmd) = s.strip_prefix("cmd:") {
            if cmd.trim().is_empty() {
                Err("cmd: needs a command".into())
            } else {
                Ok(OracleSpec::Command(cmd.to_string()))
            }
        } else {
            Err(format!("unknown oracle '{s}', expected brute or cmd:<command>"))
        }
    }
}

pub struct External {
    pub command: String,
}

impl CountOracle for External {
    fn count(&mut self, d: &Database) -> Result<BigInt> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Oracle(format!("cannot start '{}': {e}", self.command)))?;
        let text = serialize_database(d);
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(text.as_bytes())
            .map_err(|e| Error::Oracle(format!("cannot write to oracle: {e}")))?;
        let out = child
            .wait_with_output()
            .map_err(|e| Error::Oracle(format!("oracle did not finish: {e}")))?;
        if !out.status.success() {
            return Err(Error::Oracle(format!("oracle exited with {}", out.status)));
        }
        let s = String::from_utf8_lossy(&out.stdout);
        let line = s.lines().next().unwrap_or("").trim();
        line.parse::<BigInt>()
            .map_err(|_| Error::Oracle(format!("oracle printed '{line}', expected a decimal")))
    }
}

/// The chosen oracle, falling back to `brute` for the brute-force case.
pub fn select<'a>(spec: &OracleSpec, brute: Box<dyn CountOracle + 'a>) -> Box<dyn CountOracle + 'a> {
    match spec {
        OracleSpec::Brute => brute,
        OracleSpec::Command(c) => Box::new(External { command: c.clone() }),
    }
}
