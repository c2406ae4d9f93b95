fn main() {
    std::process::exit(varest::cli::main_with_args(std::env::args_os()));
}
