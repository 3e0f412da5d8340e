fn main() {
    std::process::exit(nlo_quanta::cli::main_with_args(std::env::args_os()));
}
