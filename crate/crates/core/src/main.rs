fn main() {
    std::process::exit(schatten_perturb::cli::main_with_args(std::env::args_os()));
}
