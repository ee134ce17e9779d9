fn main() {
    std::process::exit(trapdeco::cli::run(std::env::args_os()));
}
