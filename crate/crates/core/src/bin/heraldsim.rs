fn main() {
    std::process::exit(heraldsim::cli::run(std::env::args_os()));
}
