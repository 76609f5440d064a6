fn main() {
    std::process::exit(load_forecast::cli::run(std::env::args_os()));
}
