fn main() {
    std::process::exit(genfourier::cli::main_with_args(std::env::args_os()));
}
