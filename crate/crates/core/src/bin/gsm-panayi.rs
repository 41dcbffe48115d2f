fn main() {
    std::process::exit(panayi_core::cli::main_with_args(std::env::args_os()));
}
