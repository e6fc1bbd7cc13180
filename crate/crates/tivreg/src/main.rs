fn main() {
    std::process::exit(tivreg::cli::cli_main(std::env::args()));
}
