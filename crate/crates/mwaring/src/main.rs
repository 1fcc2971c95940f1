use std::io;

fn main() {
    let binary = std::env::current_exe().ok();
    let code = mwaring::cli::run(std::env::args_os(), &mut io::stdin(), &mut io::stdout(), &mut io::stderr(), binary);
    std::process::exit(code);
}
