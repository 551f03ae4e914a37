fn main() {
    std::process::exit(nuhuncc::cli::run(std::env::args_os()));
}
