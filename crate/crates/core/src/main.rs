fn main() {
    std::process::exit(agdecode::cli::run(std::env::args_os()));
}
