use clap::Parser;

fn main() {
    let cli = h2xh2::cli::Cli::parse();
    std::process::exit(h2xh2::cli::run(cli));
}
