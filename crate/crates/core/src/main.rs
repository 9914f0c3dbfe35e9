fn main() {
    std::process::exit(keyorder::cli::run(std::env::args_os()));
}
