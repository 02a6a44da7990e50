fn main() {
    std::process::exit(q3d::cli::main_with_args(std::env::args_os()));
}
