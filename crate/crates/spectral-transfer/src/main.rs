fn main() {
    std::process::exit(spectral_transfer::cli::main_with_args(std::env::args_os()));
}
