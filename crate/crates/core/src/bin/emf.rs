fn main() {
    std::process::exit(emf_core::cli::run(std::env::args_os()));
}
