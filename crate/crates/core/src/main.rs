fn main() {
    std::process::exit(hyperpolygon::cli::run(std::env::args_os()));
}
