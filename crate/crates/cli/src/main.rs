fn main() {
    eprintln!("nonlocal-kit {}: command surface under construction", nonlocal_kit::VERSION);
    std::process::exit(2);
}
