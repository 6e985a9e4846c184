fn main() {
    std::process::exit(adalasso::cli::main());
}
