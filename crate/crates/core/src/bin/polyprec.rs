fn main() { std::process::exit(polyprec::cli::main(std::env::args().collect())); }
