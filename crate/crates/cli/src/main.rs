fn main() {
    std::process::exit(citedist_cli::run(std::env::args_os()));
}
