//! Monotonic wall-clock spans.

use std::sync::OnceLock;
use std::time::Instant;

fn anchor() -> Instant {
    static ANCHOR: OnceLock<Instant> = OnceLock::new();
    *ANCHOR.get_or_init(Instant::now)
}

/// Nanoseconds since the process-wide anchor.
pub fn now_ticks() -> u64 {
    anchor().elapsed().as_nanos() as u64
}

/// A span on the monotonic clock, in nanosecond ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimerSpan {
    pub start: u64,
    pub end: u64,
}

impl TimerSpan {
    pub fn ticks(&self) -> u64 {
        self.end - self.start
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.ticks() as f64 / 1e6
    }
}

/// Runs `work` between two clock reads. Anything the caller does with the
/// result afterwards is outside the span.
pub fn time_block<T>(work: impl FnOnce() -> T) -> (T, TimerSpan) {
    let start = now_ticks();
    let out = std::hint::black_box(work());
    let end = now_ticks();
    (out, TimerSpan { start, end })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_block_is_short() {
        let ((), span) = time_block(|| ());
        assert!(span.end >= span.start);
        assert!(span.elapsed_ms() < 1.0);
    }

    #[test]
    fn elapsed_is_exact_conversion() {
        let s = TimerSpan {
            start: 5,
            end: 2_500_005,
        };
        assert_eq!(s.elapsed_ms(), 2.5);
    }
}
