fn main() {
    std::process::exit(async_fir::cli::main_with_args(std::env::args_os()));
}
