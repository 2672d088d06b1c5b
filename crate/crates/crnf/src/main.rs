fn main() {
    std::process::exit(crnf::cli::run(std::env::args_os()));
}
