fn main() {
    std::process::exit(groupnet::cli::main_with_args(std::env::args_os()));
}
