fn main() {
    std::process::exit(crossing_cli::main_with_args(std::env::args_os()));
}
