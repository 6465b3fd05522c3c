//! `law` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (bad arguments, manifest or
//! validation errors),
//! 2 runtime failure (missing fixtures, API exhaustion, I/O).

pub mod args;
mod commands;
pub mod records;

use anyhow::Result;
use clap::Parser;
use std::ffi::OsString;
use std::io::Write;

use law_core::attribution::AttributionError;
use law_core::attribution::{CachedClient, LlmClient, WebClient, WebConfig};
use law_core::corpus::CorpusError;
use law_core::drift::DriftError;
use law_core::metrics::MetricsError;

pub use commands::execute;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Creates network-backed LLM clients. Only consulted when the web backend
/// is selected.
pub trait BackendFactory: Sync {
    fn web_client(&self, model: &str, max_in_flight: usize) -> Result<Box<dyn LlmClient>>;
}

/// Chat-completion client configured from `LAW_LLM_ENDPOINT` /
/// `LAW_LLM_API_KEY`.
pub struct EnvBackend;

impl BackendFactory for EnvBackend {
    fn web_client(&self, model: &str, max_in_flight: usize) -> Result<Box<dyn LlmClient>> {
        let cfg = WebConfig::from_env(model, max_in_flight)?;
        Ok(Box::new(WebClient::new(cfg)?))
    }
}

pub(crate) fn cached(inner: Box<dyn LlmClient>, dir: &std::path::Path) -> Box<dyn LlmClient> {
    Box::new(CachedClient::new(inner, dir))
}

fn is_invalid_input(e: &(dyn std::error::Error + 'static)) -> bool {
    if e.is::<records::InvalidInput>() {
        return true;
    }
    if let Some(e) = e.downcast_ref::<CorpusError>() {
        return matches!(
            e,
            CorpusError::MalformedRecord { .. }
                | CorpusError::DuplicateDocId(_)
                | CorpusError::MissingBodyFile { .. }
                | CorpusError::InvalidUtf8 { .. }
                | CorpusError::InvalidWindow(_)
        );
    }
    if let Some(e) = e.downcast_ref::<AttributionError>() {
        return matches!(
            e,
            AttributionError::InvalidTheta(_) | AttributionError::Drift(DriftError::InvalidConfig(_))
        );
    }
    if let Some(e) = e.downcast_ref::<DriftError>() {
        return matches!(e, DriftError::InvalidConfig(_));
    }
    if let Some(e) = e.downcast_ref::<MetricsError>() {
        return matches!(
            e,
            MetricsError::MissingPrediction { .. }
                | MetricsError::EmptyGrid { .. }
                | MetricsError::LengthMismatch { .. }
        );
    }
    false
}

/// Exit code for an error that aborted a command.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.chain().any(is_invalid_input) {
        EXIT_INVALID
    } else {
        EXIT_RUNTIME
    }
}

/// Parses `argv` and runs the command, writing human-readable output to
/// `out` and diagnostics to `err`.
pub fn run<I, T>(argv: I, backend: &dyn BackendFactory, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INVALID;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli.command, backend, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code_for(&e)
        }
    }
}
