use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("COVBAL_LOG")).init();
    let cli = covbal::cli::Cli::parse();
    std::process::exit(covbal::cli::run(cli));
}
