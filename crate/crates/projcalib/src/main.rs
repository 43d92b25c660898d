fn main() {
    std::process::exit(projcalib::cli::run(std::env::args_os()));
}
