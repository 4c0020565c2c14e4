fn main() {
    std::process::exit(lhy_lab::run(std::env::args_os()));
}
