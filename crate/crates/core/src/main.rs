fn main() {
    std::process::exit(removal_lab::cli::run());
}
