fn main() -> std::process::ExitCode {
    d2t::cli::main_entry()
}
