fn main() {
    std::process::exit(wproj::cli::run());
}
