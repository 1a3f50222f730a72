fn main() {
    std::process::exit(illumwave::cli::run(std::env::args_os()));
}
