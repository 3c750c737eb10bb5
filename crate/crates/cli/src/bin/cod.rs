use std::process::ExitCode;

fn main() -> ExitCode {
    if let Ok(n) = std::env::var("COD_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            _ => {
                eprintln!("error: COD_THREADS must be a positive integer");
                return ExitCode::from(cod_cli::app::EXIT_USAGE as u8);
            }
        }
    }
    let code = cod_cli::app::main_with(std::env::args().collect());
    ExitCode::from(code as u8)
}
