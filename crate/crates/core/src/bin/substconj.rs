use std::io::Write;

fn main() {
    let (code, output) = substconj::cli::run(std::env::args().collect());
    let mut stdout = std::io::stdout();
    let _ = stdout.write_all(output.as_bytes());
    let _ = stdout.flush();
    std::process::exit(code);
}
