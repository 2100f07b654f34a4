use std::process::ExitCode;

use clap::Parser;

use sepdim_cli::{emit, init_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let result = run(&cli).and_then(|out| emit(&cli, &out).map(|()| out.code));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
