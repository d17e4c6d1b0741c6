fn main() {
    std::process::exit(qcollapse::cli::run());
}
