fn main() {
    std::process::exit(treepark::cli::run(std::env::args_os()));
}
