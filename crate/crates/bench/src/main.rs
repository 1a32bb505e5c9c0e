fn main() {
    std::process::exit(pbpqlp_bench::cli::main_with(std::env::args_os()));
}
