fn main() {
    std::process::exit(best2cop::cli::run_from_env());
}
