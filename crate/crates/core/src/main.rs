fn main() {
    std::process::exit(msos::cli::run(std::env::args_os()));
}
