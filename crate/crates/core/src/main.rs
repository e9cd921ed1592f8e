use clap::Parser;
use v2vint::cli::{dispatch, exit_code_for, Cli};

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(output) => {
            print!("{output}");
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code_for(&err));
        }
    }
}
