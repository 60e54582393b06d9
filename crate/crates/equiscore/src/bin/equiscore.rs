fn main() {
    std::process::exit(equiscore::cli::run());
}
