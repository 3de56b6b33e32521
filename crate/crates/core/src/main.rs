fn main() {
    std::process::exit(zsfree::cli::run());
}
