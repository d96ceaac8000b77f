fn main() {
    std::process::exit(vemspectra::cli_io::parse_and_dispatch(std::env::args_os()));
}
