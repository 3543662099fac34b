fn main() {
    std::process::exit(hgsparse_cli::run(std::env::args_os()));
}
