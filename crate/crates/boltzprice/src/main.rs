use boltzprice::cli::Cli;
use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_errors = cli.json_errors();
    match cli.run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if json_errors {
                eprintln!(
                    "{}",
                    serde_json::json!({ "kind": err.kind(), "message": err.message() })
                );
            } else {
                eprintln!("error: {}", err.message());
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
