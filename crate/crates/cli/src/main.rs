fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(freiheit_cli::dispatch(&argv));
}
