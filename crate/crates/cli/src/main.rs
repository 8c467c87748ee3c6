use clap::Parser;
use nvmem_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("nvmem: {e}");
        std::process::exit(e.exit_code());
    }
}
