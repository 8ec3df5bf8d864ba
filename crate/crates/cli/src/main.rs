fn main() {
    std::process::exit(bosq_cli::main_with_args(std::env::args_os()));
}
