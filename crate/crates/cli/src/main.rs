fn main() {
    std::process::exit(comb_nls_cli::run(std::env::args_os()));
}
