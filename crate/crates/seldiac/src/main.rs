fn main() {
    std::process::exit(seldiac::cli::run_main());
}
