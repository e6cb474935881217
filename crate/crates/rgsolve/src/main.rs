use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut stdout = String::new();
    let mut stderr = String::new();
    let code = rgsolve::run_command(&args, &mut stdout, &mut stderr);
    print!("{stdout}");
    let _ = std::io::stderr().write_all(stderr.as_bytes());
    std::process::exit(code);
}
