fn main() {
    std::process::exit(discrete_sl2::cli::run(std::env::args_os()));
}
