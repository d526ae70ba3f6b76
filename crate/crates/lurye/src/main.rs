fn main() {
    let code = lurye::cli::main_entry(std::env::args_os());
    std::process::exit(code);
}
