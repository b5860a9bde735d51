use clap::Parser;

fn main() {
    let cli = lglab::cli::Cli::parse();
    std::process::exit(lglab::cli::run(cli));
}
