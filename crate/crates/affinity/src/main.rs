fn main() {
    std::process::exit(affinity::cli::run(std::env::args_os()));
}
