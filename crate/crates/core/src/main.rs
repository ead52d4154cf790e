fn main() {
    std::process::exit(drinlev::run());
}
