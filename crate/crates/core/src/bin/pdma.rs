fn main() {
    std::process::exit(pdma::cli::run(std::env::args_os()));
}
