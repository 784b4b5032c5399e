fn main() {
    std::process::exit(gxr_harness::cli_run(std::env::args_os()));
}
