use std::collections::VecDeque;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

/// Sliding-window limiter: at most `max_per_window` grants in any interval
/// of length `window`.
///
/// Keeps the grant times of the current window. A grant at `t` is allowed only
/// if fewer than `max_per_window` earlier grants lie in `(t - window, t]`, so
/// every half-open interval `[s, s + window)` holds at most `max_per_window`.
#[derive(Debug)]
pub struct RateLimiter {
    max_per_window: usize,
    window: Duration,
    state: Mutex<State>,
}

#[derive(Debug, Default)]
struct State {
    recent: VecDeque<Instant>,
    trace: Option<Vec<Instant>>,
    granted: u64,
}

impl RateLimiter {
    pub fn new(max_per_window: usize, window: Duration) -> Self {
        assert!(
            max_per_window >= 1,
            "rate limit must allow at least one request"
        );
        assert!(!window.is_zero(), "rate window must be positive");
        Self {
            max_per_window,
            window,
            state: Mutex::new(State::default()),
        }
    }

    /// Also record every grant time, for inspection through [`RateLimiter::trace`].
    pub fn with_trace(self) -> Self {
        self.state.lock().unwrap().trace = Some(Vec::new());
        self
    }

    /// Blocks until a request may start and returns its grant time.
    pub fn acquire(&self) -> Instant {
        loop {
            let wait = {
                let mut state = self.state.lock().unwrap();
                let now = Instant::now();
                while state
                    .recent
                    .front()
                    .is_some_and(|t| now.duration_since(*t) >= self.window)
                {
                    state.recent.pop_front();
                }
                if state.recent.len() < self.max_per_window {
                    state.recent.push_back(now);
                    state.granted += 1;
                    if let Some(trace) = state.trace.as_mut() {
                        trace.push(now);
                    }
                    return now;
                }
                let oldest = *state.recent.front().expect("window is full");
                (oldest + self.window).saturating_duration_since(now)
            };
            thread::sleep(wait.max(Duration::from_micros(50)));
        }
    }

    pub fn granted(&self) -> u64 {
        self.state.lock().unwrap().granted
    }

    pub fn trace(&self) -> Vec<Instant> {
        self.state.lock().unwrap().trace.clone().unwrap_or_default()
    }

    pub fn max_per_window(&self) -> usize {
        self.max_per_window
    }

    pub fn window(&self) -> Duration {
        self.window
    }
}

/// Largest number of timestamps falling in any half-open interval of length
/// `window`. `times` need not be sorted.
pub fn max_in_any_window(times: &[Instant], window: Duration) -> usize {
    let mut sorted = times.to_vec();
    sorted.sort();
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..sorted.len() {
        while sorted[hi].duration_since(sorted[lo]) >= window {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}
