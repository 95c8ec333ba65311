fn main() {
    std::process::exit(hdlab::cli::run(std::env::args_os()));
}
