fn main() {
    std::process::exit(causal_aba::cli::main_entry(std::env::args_os()));
}
