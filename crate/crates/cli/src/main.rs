use std::process::ExitCode;

fn main() -> ExitCode {
    let code = law_cli::run(
        std::env::args_os(),
        &law_cli::EnvBackend,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
