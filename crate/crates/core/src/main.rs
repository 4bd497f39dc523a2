fn main() {
    std::process::exit(occfactor::cli::run(std::env::args_os()));
}
