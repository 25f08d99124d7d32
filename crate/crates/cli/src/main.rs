fn main() {
    std::process::exit(hole_lab_cli::run(std::env::args_os()));
}
