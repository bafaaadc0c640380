fn main() {
    std::process::exit(leadlag::cli::run_from(std::env::args_os()));
}
