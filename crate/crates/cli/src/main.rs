fn main() {
    std::process::exit(pathmetric_cli::execute(std::env::args_os()));
}
