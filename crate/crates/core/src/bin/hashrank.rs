fn main() {
    std::process::exit(hashrank::cli::main());
}
