use clap::Parser;

fn main() {
    let cli = bethelab_cli::Cli::parse();
    std::process::exit(bethelab_cli::run(&cli));
}
