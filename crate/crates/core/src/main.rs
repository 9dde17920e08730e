use clap::Parser;

fn main() {
    let cli = stackshift::cli::Cli::parse();
    std::process::exit(stackshift::cli::run(cli));
}
