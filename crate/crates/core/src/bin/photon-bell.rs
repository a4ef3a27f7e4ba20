fn main() {
    photon_bell::cli::configure_threads();
    std::process::exit(photon_bell::cli::run(std::env::args_os()));
}
