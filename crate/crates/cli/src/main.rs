use std::process::ExitCode;

use clap::Parser;
use memcap_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.common.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    run(&cli)
}
