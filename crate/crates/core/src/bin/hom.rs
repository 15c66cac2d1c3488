fn main() {
    std::process::exit(hom_core::cli::main_with_args(std::env::args()));
}
