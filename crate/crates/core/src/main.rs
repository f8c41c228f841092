fn main() {
    std::process::exit(termflow::cli::run(std::env::args_os()));
}
