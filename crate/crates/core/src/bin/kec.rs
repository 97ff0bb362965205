fn main() {
    std::process::exit(kec::cli::run(std::env::args_os()));
}
