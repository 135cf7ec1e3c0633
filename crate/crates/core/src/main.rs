fn main() {
    std::process::exit(rspose::cli::run(std::env::args_os()));
}
