fn main() {
    std::process::exit(semvia_core::cli::run(std::env::args_os()));
}
