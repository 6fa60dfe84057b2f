fn main() {
    std::process::exit(wavemap_core::cli::run(std::env::args_os()));
}
