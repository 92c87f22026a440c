fn main() {
    std::process::exit(kuramoto_cli::run(std::env::args_os()));
}
