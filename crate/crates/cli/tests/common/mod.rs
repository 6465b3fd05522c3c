#![allow(dead_code)]

use std::path::Path;

use law_cli::BackendFactory;
use law_core::attribution::LlmClient;
use law_core::synthetic::{self, WrittenCorpus};

/// Fails the test if any command tries to build a network client.
pub struct NoNetwork;

impl BackendFactory for NoNetwork {
    fn web_client(&self, _model: &str, _max_in_flight: usize) -> anyhow::Result<Box<dyn LlmClient>> {
        panic!("network backend constructed while the fixture backend was selected");
    }
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn law(args: &[&str]) -> Output {
    law_with(&NoNetwork, args)
}

pub fn law_with(backend: &dyn BackendFactory, args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("law").chain(args.iter().copied());
    let code = law_cli::run(argv, backend, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn synthetic_corpus(dir: &Path) -> WrittenCorpus {
    synthetic::write_corpus(&synthetic::generate(synthetic::DEFAULT_SEED), dir).unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
