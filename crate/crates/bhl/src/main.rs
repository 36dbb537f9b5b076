fn main() {
    std::process::exit(bhl::cli::run(std::env::args_os()));
}
