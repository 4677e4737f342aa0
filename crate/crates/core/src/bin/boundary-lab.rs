fn main() {
    std::process::exit(boundary_lab::run_cli(std::env::args()));
}
