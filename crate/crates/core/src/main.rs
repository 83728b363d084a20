fn main() {
    std::process::exit(hyperpi::report::cli::cli_main(std::env::args_os()));
}
