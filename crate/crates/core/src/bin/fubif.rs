fn main() -> std::process::ExitCode {
    fubif::cli::main()
}
