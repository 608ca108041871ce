fn main() {
    std::process::exit(swp_cli::main_with_args(std::env::args_os()));
}
