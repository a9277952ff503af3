fn main() {
    std::process::exit(kle::cli::run(std::env::args_os()));
}
