fn main() {
    std::process::exit(rnabox::cli::main());
}
