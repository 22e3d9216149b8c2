use clap::Parser;
use supplyflex::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
