fn main() {
    std::process::exit(weak_euler::cli::run(std::env::args_os()));
}
