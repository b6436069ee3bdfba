fn main() -> std::process::ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    gdprscan::cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock()).into()
}
