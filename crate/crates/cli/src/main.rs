fn main() {
    std::process::exit(papsim_cli::main_with_args(std::env::args_os()));
}
