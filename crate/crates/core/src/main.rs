fn main() {
    std::process::exit(mixcraft::cli::main_with_args(std::env::args_os()));
}
