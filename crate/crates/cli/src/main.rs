//! `traction` command-line entry point; see the `traction_cli` library.

fn main() {
    let code = traction_cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
