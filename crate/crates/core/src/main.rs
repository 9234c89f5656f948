fn main() -> std::process::ExitCode {
    wsticky::cli::main()
}
