fn main() {
    std::process::exit(decompound::run(std::env::args_os()));
}
