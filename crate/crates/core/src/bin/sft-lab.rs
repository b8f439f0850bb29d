fn main() {
    std::process::exit(sft_lab::cli::main_with_args(std::env::args_os()));
}
