mod args;
mod commands;
mod error;
mod table;

use clap::{CommandFactory, FromArgMatches};

use args::Cli;

fn main() {
    let version: &'static str = Box::leak(
        format!(
            "{} (rng: {})",
            env!("CARGO_PKG_VERSION"),
            node_sense::rng::RNG_NAME
        )
        .into_boxed_str(),
    );
    let matches = match Cli::command().version(version).try_get_matches() {
        Ok(m) => m,
        // Help and version exit 0; everything else is a usage error (2).
        Err(e) => e.exit(),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let code = commands::report(commands::run(&cli), cli.quiet);
    std::process::exit(code);
}
