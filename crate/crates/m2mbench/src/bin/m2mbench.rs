fn main() {
    std::process::exit(m2mbench::cli_main());
}
