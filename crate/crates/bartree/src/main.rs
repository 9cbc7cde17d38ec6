fn main() {
    std::process::exit(bartree::cli::run(std::env::args_os()));
}
