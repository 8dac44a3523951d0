//! Minimum-interval rate limiting with an injectable clock so the ceiling is
//! testable without wall-clock sleeps.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

pub trait Clock: Send + Sync {
    /// Monotonic time since the clock's epoch.
    fn now(&self) -> Duration;
    fn sleep(&self, duration: Duration);
}

/// Wall-clock implementation.
pub struct SystemClock {
    epoch: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock {
            epoch: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.epoch.elapsed()
    }

    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// Virtual clock for tests: `sleep` advances time instead of blocking.
pub struct FakeClock {
    nanos: AtomicU64,
}

impl FakeClock {
    pub fn new() -> Self {
        FakeClock {
            nanos: AtomicU64::new(0),
        }
    }
}

impl Default for FakeClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for FakeClock {
    fn now(&self) -> Duration {
        Duration::from_nanos(self.nanos.load(Ordering::SeqCst))
    }

    fn sleep(&self, duration: Duration) {
        self.nanos
            .fetch_add(duration.as_nanos() as u64, Ordering::SeqCst);
    }
}

/// Serializes callers so that consecutive permits are at least one interval
/// apart. The limiter is the single synchronization point for shared clients.
pub struct RateLimiter {
    min_interval: Duration,
    clock: Arc<dyn Clock>,
    last: Mutex<Option<Duration>>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration, clock: Arc<dyn Clock>) -> Self {
        RateLimiter {
            min_interval,
            clock,
            last: Mutex::new(None),
        }
    }

    pub fn per_second(requests_per_second: f64, clock: Arc<dyn Clock>) -> Self {
        assert!(requests_per_second > 0.0);
        Self::new(Duration::from_secs_f64(1.0 / requests_per_second), clock)
    }

    /// Block (via the clock) until the next request is allowed, and claim its
    /// slot. Returns the virtual time of the permit.
    pub fn acquire(&self) -> Duration {
        let mut last = self.last.lock().expect("rate limiter lock");
        let now = self.clock.now();
        let ready = match *last {
            None => now,
            Some(prev) => {
                let next = prev + self.min_interval;
                if next > now {
                    self.clock.sleep(next - now);
                    next
                } else {
                    now
                }
            }
        };
        *last = Some(ready);
        ready
    }
}
