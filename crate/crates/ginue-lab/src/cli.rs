//! Command-line interface: placeholder, replaced by the full driver.

/// Exit code entry point.
pub fn run() -> i32 {
    eprintln!("ginue-lab: no subcommands wired up yet");
    2
}
