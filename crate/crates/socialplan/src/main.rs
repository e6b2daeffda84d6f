fn main() {
    std::process::exit(socialplan::cli::main_with(std::env::args_os()));
}
