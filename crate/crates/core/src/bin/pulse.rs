fn main() {
    std::process::exit(pulse::cli::run(std::env::args_os()));
}
