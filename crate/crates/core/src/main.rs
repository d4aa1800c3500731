fn main() {
    std::process::exit(dps::cli::main_with_args(std::env::args_os()));
}
