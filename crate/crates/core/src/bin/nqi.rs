use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter("NQI_LOG")).init();
    let code = nqi::cli::run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr());
    std::process::exit(code);
}
