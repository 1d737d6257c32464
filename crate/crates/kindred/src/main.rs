use std::io::Read;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let stdin = if args.iter().any(|a| a == "-") {
        let mut buf = String::new();
        if std::io::stdin().read_to_string(&mut buf).is_err() {
            eprintln!("error: stdin is not valid UTF-8");
            std::process::exit(2);
        }
        Some(buf)
    } else {
        None
    };
    let outcome = kindred::cli::run_cli(&args, stdin.as_deref());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    std::process::exit(outcome.code);
}
