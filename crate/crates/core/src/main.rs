fn main() -> std::process::ExitCode {
    stefan_lab::cli::main()
}
