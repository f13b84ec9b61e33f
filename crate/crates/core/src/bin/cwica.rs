fn main() {
    std::process::exit(cwica::cli::main());
}
