fn main() {
    std::process::exit(fo_lab::cli::main_with_args(std::env::args_os()));
}
