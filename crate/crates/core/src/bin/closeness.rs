fn main() {
    std::process::exit(closeness::cli::main_with_args(std::env::args_os()));
}
