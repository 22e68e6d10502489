//! Identification embedded in every result file.

use std::fmt::Write as _;
use suple_core::Config;

/// `git describe --always --dirty --tags` of the source tree at build time.
pub const GIT_DESCRIBE: &str = env!("SUPLE_GIT_DESCRIBE");

/// `# `-prefixed lines carrying the build, the seeds and every config entry.
/// They precede the CSV header, so comment-aware readers skip them.
pub fn header(config: &Config, seeds: &[u64]) -> String {
    let mut out = format!("# git: {GIT_DESCRIBE}\n");
    let seeds: Vec<String> = seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(out, "# seed: {}", seeds.join(","));
    for (k, v) in config.iter() {
        let _ = writeln!(out, "# config: {k}={v}");
    }
    out
}

/// Strips the provenance lines written by [`header`].
pub fn strip_header(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, r)| r);
    }
    rest
}

/// Recovers the config embedded by [`header`].
pub fn embedded_config(text: &str) -> Config {
    let mut cfg = Config::default();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(entry) = line.strip_prefix("# config: ") {
            let _ = cfg.apply_assignment(entry);
        }
    }
    cfg
}
