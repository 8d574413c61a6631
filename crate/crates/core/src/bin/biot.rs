use clap::Parser;

fn main() {
    let cli = biot_mixed::cli::Cli::parse();
    std::process::exit(biot_mixed::cli::run(&cli));
}
