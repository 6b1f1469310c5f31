fn main() {
    std::process::exit(diffrt::cli::main_with_args(std::env::args_os()));
}
