fn main() -> std::process::ExitCode {
    urnsim::cli::main()
}
