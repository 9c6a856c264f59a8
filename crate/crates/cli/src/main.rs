use clap::Parser;

use qgld_cli::{emit, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli).and_then(|out| emit(&out)) {
        eprintln!("qgld: {e}");
        std::process::exit(e.exit_code());
    }
}
