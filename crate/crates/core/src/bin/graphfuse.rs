fn main() {
    std::process::exit(graphfuse::cli::main_with_args(std::env::args_os()));
}
