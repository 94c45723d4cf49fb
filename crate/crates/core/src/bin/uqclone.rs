fn main() {
    std::process::exit(uqclone::cli::main_with_args(std::env::args_os()));
}
