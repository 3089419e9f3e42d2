use clap::Parser;

use optbench::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(dispatch(cli));
}
