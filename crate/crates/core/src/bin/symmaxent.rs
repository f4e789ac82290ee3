fn main() {
    std::process::exit(symmaxent::cli::main_with_args(std::env::args_os()));
}
