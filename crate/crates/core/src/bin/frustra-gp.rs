fn main() {
    std::process::exit(frustra_gp::cli::run(std::env::args_os()));
}
