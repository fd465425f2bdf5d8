fn main() {
    std::process::exit(acae::cli::run(std::env::args_os()));
}
