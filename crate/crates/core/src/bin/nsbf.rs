fn main() {
    std::process::exit(nsbf::cli::run(std::env::args_os()));
}
