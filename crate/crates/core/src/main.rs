fn main() {
    std::process::exit(qstbell::cli::dispatch(std::env::args_os()));
}
