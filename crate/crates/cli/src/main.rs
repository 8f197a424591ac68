fn main() {
    std::process::exit(gapdecay_cli::main_with_args(std::env::args_os()));
}
