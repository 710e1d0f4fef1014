use std::io;

fn main() {
    let stdin = io::stdin();
    let code = gridcycle::cli::run_from_args(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut io::stdout(),
        &mut io::stderr(),
    );
    std::process::exit(code);
}
