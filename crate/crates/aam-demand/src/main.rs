use clap::Parser;

fn main() {
    let cli = aam_demand::cli::Cli::parse();
    if let Err(e) = aam_demand::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
