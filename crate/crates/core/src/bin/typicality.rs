use clap::Parser;
use typicality::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    run(Cli::parse())
}
