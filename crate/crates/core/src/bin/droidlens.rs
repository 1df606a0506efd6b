fn main() {
    std::process::exit(droidlens::cli::run_cli(std::env::args_os()));
}
