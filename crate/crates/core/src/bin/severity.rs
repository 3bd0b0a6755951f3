fn main() {
    std::process::exit(composite_severity::cli::run(std::env::args_os()));
}
