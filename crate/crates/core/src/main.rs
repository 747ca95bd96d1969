fn main() {
    std::process::exit(driftfill::cli::run(std::env::args_os()));
}
