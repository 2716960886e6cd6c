fn main() {
    std::process::exit(broadbeam::cli::run_from(std::env::args_os()));
}
