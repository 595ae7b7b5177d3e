fn main() {
    std::process::exit(erhit_core::cli::main_with(std::env::args_os()));
}
