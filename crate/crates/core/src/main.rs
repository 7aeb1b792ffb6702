fn main() {
    std::process::exit(qdiff::cli::run(std::env::args_os()));
}
