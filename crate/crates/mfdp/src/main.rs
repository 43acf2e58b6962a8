fn main() {
    std::process::exit(mfdp::cli::main_with_args(std::env::args_os()));
}
