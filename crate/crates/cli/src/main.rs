use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = mlexp_cli::run_argv(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(outcome.output.as_bytes())
        .and_then(|_| stdout.flush())
        .is_err()
    {
        return ExitCode::from(mlexp_cli::EXIT_FAILURE as u8);
    }
    eprint!("{}", outcome.messages);
    ExitCode::from(outcome.code as u8)
}
