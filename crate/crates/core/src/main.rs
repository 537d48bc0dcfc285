fn main() {
    std::process::exit(becgrav::cli::run(std::env::args()));
}
