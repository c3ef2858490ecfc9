use clap::Parser;
use outbreak_core::cli::{execute, exit_code, Cli};

fn main() {
    let cli = Cli::parse();
    let result = execute(&cli);
    // Error messages already carry their causes.
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    std::process::exit(exit_code(&result));
}
