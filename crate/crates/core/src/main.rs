fn main() {
    std::process::exit(ots_lab::cli::dispatch(std::env::args_os()));
}
