fn main() {
    std::process::exit(hqnet_cli::run(std::env::args_os()));
}
