use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

/// Per-host request spacing shared by every worker in a process.
///
/// Each call to [`RateGate::wait`] reserves the next free slot for the host
/// and sleeps until it arrives, so consecutive requests to one host are at
/// least `interval` apart regardless of how many threads issue them.
#[derive(Debug, Default)]
pub struct RateGate {
    next_slot: Mutex<HashMap<String, Instant>>,
}

impl RateGate {
    pub fn new() -> Self {
        Self::default()
    }

    /// The process-wide gate used by [`super::Fetcher::new`].
    pub fn global() -> Arc<RateGate> {
        static GLOBAL: OnceLock<Arc<RateGate>> = OnceLock::new();
        GLOBAL.get_or_init(|| Arc::new(RateGate::new())).clone()
    }

    /// Blocks until a request to `host` may be sent.
    pub fn wait(&self, host: &str, interval: Duration) {
        let slot = {
            let mut slots = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = slots.get(host).copied().map_or(now, |next| next.max(now));
            slots.insert(host.to_string(), slot + interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
    }
}
