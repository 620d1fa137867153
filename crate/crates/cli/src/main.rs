fn main() {
    std::process::exit(gpy_cli::run(std::env::args_os()));
}
