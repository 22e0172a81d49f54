fn main() {
    std::process::exit(tlscool::cli::run());
}
