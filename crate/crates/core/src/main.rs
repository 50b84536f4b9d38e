fn main() {
    std::process::exit(featgraph::cli::run(std::env::args_os()));
}
