fn main() {
    std::process::exit(kickrotor::cli::main_with_args(std::env::args_os()));
}
