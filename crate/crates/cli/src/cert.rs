//! Certificates: stable key=value records of one verification run.

use std::fmt;
use std::time::Duration;

pub const FORMAT: &str = "palinword-certificate/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Verified,
    Refuted,
    Inconclusive,
    /// The method does not apply to the input.
    NotApplicable,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::Refuted => 1,
            Status::Inconclusive => 2,
            Status::NotApplicable => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Verified => "VERIFIED",
            Status::Refuted => "REFUTED",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::NotApplicable => "NOT-APPLICABLE",
        }
    }

    /// The least conclusive of two statuses.
    pub fn combine(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Verified => 0,
            Status::Inconclusive => 1,
            Status::NotApplicable => 2,
            Status::Refuted => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub result: Vec<(String, String)>,
    pub status: Status,
    pub elapsed: Duration,
    /// Free-form text printed ahead of the record (rendered tables).
    pub report: Option<String>,
}

impl Certificate {
    pub fn new(command: &str) -> Self {
        Certificate { command: command.to_string(), inputs: Vec::new(), result: Vec::new(), status: Status::Verified, elapsed: Duration::ZERO, report: None }
    }

    pub fn input(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.inputs.push((key.to_string(), one_line(&value.to_string())));
        self
    }

    pub fn result(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.result.push((key.to_string(), one_line(&value.to_string())));
        self
    }

    pub fn status(&mut self, s: Status) -> &mut Self {
        self.status = self.status.combine(s);
        self
    }

    /// Everything except the elapsed time.
    pub fn identity(&self) -> String {
        let mut s = format!("format={FORMAT}\ntool_version={}\ncommand={}\n", env!("CARGO_PKG_VERSION"), self.command);
        for (k, v) in &self.inputs {
            s.push_str(&format!("input.{k}={v}\n"));
        }
        for (k, v) in &self.result {
            s.push_str(&format!("result.{k}={v}\n"));
        }
        s.push_str(&format!("status={}\n", self.status.label()));
        s
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = &self.report {
            writeln!(f, "{r}")?;
        }
        write!(f, "{}elapsed_ms={}", self.identity(), self.elapsed.as_millis())
    }
}

/// Multi-line values (constraint sets, morphisms) are joined with `; `.
fn one_line(s: &str) -> String {
    s.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join("; ")
}

/// Words longer than this are abbreviated in certificates.
pub const WORD_LIMIT: usize = 400;

pub fn show_word(w: &palinword::Word) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else if w.len() <= WORD_LIMIT {
        w.to_string()
    } else {
        format!("{}...({} letters)", w.prefix(WORD_LIMIT), w.len())
    }
}
