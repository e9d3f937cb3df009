use clap::Parser;

fn main() {
    let cli = qpbn_cli::Cli::parse();
    std::process::exit(qpbn_cli::run(&cli));
}
