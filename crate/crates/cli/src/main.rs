fn main() {
    std::process::exit(cff_cli::run(std::env::args_os()));
}
