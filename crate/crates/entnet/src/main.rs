fn main() {
    std::process::exit(entnet::cli::run(std::env::args_os()));
}
