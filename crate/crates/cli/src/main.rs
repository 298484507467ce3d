fn main() {
    std::process::exit(strokelab::run(std::env::args_os()));
}
