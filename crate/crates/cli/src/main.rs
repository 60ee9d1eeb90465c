fn main() {
    std::process::exit(ilid_cli::run(std::env::args_os()));
}
