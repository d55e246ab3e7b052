fn main() {
    std::process::exit(detproc::cli::run(std::env::args_os()));
}
