fn main() {
    std::process::exit(pairprobe::cli::main_with(std::env::args_os()));
}
