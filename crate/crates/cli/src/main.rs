use clap::Parser;

fn main() {
    let args = qgsw_cli::Args::parse();
    std::process::exit(qgsw_cli::run(&args));
}
