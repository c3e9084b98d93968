use clap::Parser;
use tetris_cli::{run, Cli};

fn main() {
    match run(Cli::parse()) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("tetris: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
