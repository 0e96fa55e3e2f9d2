use clap::Parser;
use lqgame_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = lqgame_cli::commands::run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
