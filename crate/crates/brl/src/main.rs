fn main() {
    std::process::exit(brl::harness::cli_main());
}
