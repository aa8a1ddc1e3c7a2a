fn main() {
    std::process::exit(wedgetri::cli::run(std::env::args_os()));
}
