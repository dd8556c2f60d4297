use clap::Parser;

fn main() {
    let cli = mlweave::cli::Cli::parse();
    if let Err(err) = mlweave::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
