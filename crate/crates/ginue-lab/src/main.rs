fn main() {
    std::process::exit(ginue_lab::cli::run());
}
