fn main() {
    std::process::exit(advrefine::cli::main_with_args(std::env::args_os()));
}
