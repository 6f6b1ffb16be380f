fn main() {
    std::process::exit(kicked_cli::main_with_args(std::env::args_os()));
}
