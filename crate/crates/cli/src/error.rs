use std::fmt;

use macsort_core::annotation::AnnotationError;
use macsort_core::config::ConfigError;
use macsort_core::io_mot::IoError;
use macsort_core::mac_sort::AssocError;
use macsort_core::metrics::MetricsError;
use macsort_core::motion::MotionError;
use macsort_core::synth::SynthError;
use macsort_core::tpod::FilterError;

/// Exit status for bad inputs (files, config, specs).
pub const EXIT_INPUT: i32 = 2;
/// Exit status for failures while processing valid inputs.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub msg: String,
    pub exit: i32,
}

impl CliError {
    pub fn input(code: &str, msg: impl Into<String>) -> Self {
        Self { code: code.to_string(), msg: msg.into(), exit: EXIT_INPUT }
    }

    pub fn runtime(code: &str, msg: impl Into<String>) -> Self {
        Self { code: code.to_string(), msg: msg.into(), exit: EXIT_RUNTIME }
    }

    /// Prefixes the message with the sequence it came from.
    pub fn context(mut self, what: &str) -> Self {
        self.msg = format!("{what}: {}", self.msg);
        self
    }
}

impl fmt::Display for CliError {
    /// One line: newlines in messages are flattened.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error: code={} msg={}", self.code, self.msg.replace('\n', " "))
    }
}

/// Variant name from the derived Debug output.
fn variant<E: fmt::Debug>(e: &E) -> String {
    let dbg = format!("{e:?}");
    dbg.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect()
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::input(e.code(), e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::input(&variant(&e), e.to_string())
    }
}

impl From<AnnotationError> for CliError {
    fn from(e: AnnotationError) -> Self {
        Self::input(&variant(&e), e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        Self::input(&variant(&e), e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Io(io) => io.into(),
            other => Self::input(&variant(&other), other.to_string()),
        }
    }
}

impl From<FilterError> for CliError {
    fn from(e: FilterError) -> Self {
        Self::runtime(&variant(&e), e.to_string())
    }
}

impl From<AssocError> for CliError {
    fn from(e: AssocError) -> Self {
        match e {
            AssocError::Motion(MotionError::Geometry(g)) => Self::runtime(&variant(&g), g.to_string()),
            AssocError::Motion(m) => Self::runtime(&variant(&m), m.to_string()),
            AssocError::InvalidConfig(_) => Self::input("InvalidConfig", e.to_string()),
            other => Self::runtime(&variant(&other), other.to_string()),
        }
    }
}
