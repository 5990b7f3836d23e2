fn main() {
    std::process::exit(ncswipt::cli::run(std::env::args_os()));
}
