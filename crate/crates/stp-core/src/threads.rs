//! Worker-count control.
//!
//! `STP_THREADS` caps the global rayon pool; call [`init_from_env`] once at
//! process start (later calls are no-ops because the global pool can only
//! be configured once).

pub fn init_from_env() {
    if let Ok(v) = std::env::var("STP_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}
