fn main() {
    std::process::exit(bgc::cli::main_with_args(std::env::args_os()));
}
