use clap::Parser;

fn main() {
    let cli = middleman_cli::Cli::parse();
    if let Err(err) = middleman_cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
