fn main() {
    std::process::exit(cwe_senses::cli::run(std::env::args_os()));
}
