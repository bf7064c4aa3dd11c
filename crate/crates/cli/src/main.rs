fn main() {
    std::process::exit(cbmm::run_cli());
}
