fn main() {
    std::process::exit(formweave::cli::main())
}
