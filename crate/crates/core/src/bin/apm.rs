use clap::Parser;

fn main() {
    let cli = apm::cli::Cli::parse();
    std::process::exit(apm::cli::main_with(cli));
}
