fn main() {
    std::process::exit(qht::cli::run(std::env::args_os()));
}
