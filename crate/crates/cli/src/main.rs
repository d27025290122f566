use clap::Parser;
use ifs_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    std::process::exit(ifs_cli::run(&cli));
}
