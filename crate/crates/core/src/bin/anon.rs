fn main() {
    std::process::exit(divanon::cli::main());
}
