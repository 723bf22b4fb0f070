fn main() {
    std::process::exit(olp_cli::run(std::env::args_os()));
}
