fn main() {
    std::process::exit(tavis_cli::main_with_args(std::env::args().collect()));
}
