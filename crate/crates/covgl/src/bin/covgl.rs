use clap::Parser;

fn main() {
    // keep BLAS single-threaded: replicates already run in parallel, and
    // a fixed thread count keeps outputs byte-identical across runs
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    env_logger::Builder::from_env(env_logger::Env::new().filter("COVGL_LOG")).init();
    let cli = covgl::cli::Cli::parse();
    std::process::exit(covgl::cli::run(cli));
}
