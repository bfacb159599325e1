fn main() {
    std::process::exit(bpmcf_cli::run(std::env::args_os()));
}
