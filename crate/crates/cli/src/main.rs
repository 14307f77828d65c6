fn main() {
    std::process::exit(miniprob_cli::run(std::env::args_os()));
}
