fn main() {
    std::process::exit(survcred_cli::run(std::env::args_os().collect()));
}
