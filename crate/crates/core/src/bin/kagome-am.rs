fn main() {
    kagome_am::cli::main()
}
