fn main() {
    std::process::exit(diploid_ad::cli::main_with_args(std::env::args_os()));
}
