fn main() {
    std::process::exit(bihamiltonian::cli::run());
}
