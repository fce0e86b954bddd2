fn main() {
    std::process::exit(ftflow_cli::dispatch(std::env::args_os()));
}
