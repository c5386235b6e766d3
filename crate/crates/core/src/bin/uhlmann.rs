fn main() {
    std::process::exit(uhlmann::cli::main_with_args(std::env::args_os()));
}
