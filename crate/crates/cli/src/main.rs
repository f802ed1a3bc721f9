fn main() {
    std::process::exit(sublab_cli::main_with_args(std::env::args_os()));
}
