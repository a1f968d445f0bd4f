fn main() {
    std::process::exit(quench_core::cli::main());
}
