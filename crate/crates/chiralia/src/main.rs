fn main() {
    // die quietly when stdout is a pipe that closes early (e.g. | head)
    // instead of panicking from inside a print
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(chiralia::cli::run(std::env::args()));
}
