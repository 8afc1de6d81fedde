fn main() -> std::process::ExitCode {
    catswap::cli::main()
}
