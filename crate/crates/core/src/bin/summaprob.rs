fn main() {
    std::process::exit(summaprob::cli::run_cli(std::env::args_os()));
}
