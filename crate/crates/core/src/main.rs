fn main() {
    std::process::exit(shapewave::cli::run(std::env::args_os()));
}
