fn main() {
    std::process::exit(bodefrac::cli::run());
}
