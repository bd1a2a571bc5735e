use clap::Parser;

fn main() {
    let cli = step_parts::cli::Cli::parse();
    std::process::exit(step_parts::cli::run(cli));
}
