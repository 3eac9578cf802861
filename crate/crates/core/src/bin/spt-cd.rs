fn main() {
    std::process::exit(subspace_graphs::cli::run(std::env::args_os()));
}
