use std::sync::{Arc, Condvar, Mutex};

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse};

pub const DEFAULT_IN_FLIGHT: usize = 4;

/// Counting semaphore bounding concurrent backend calls.
#[derive(Debug, Clone)]
pub struct InFlightLimit {
    inner: Arc<(Mutex<State>, Condvar)>,
}

#[derive(Debug)]
struct State {
    free: usize,
    in_flight: usize,
    peak: usize,
}

impl InFlightLimit {
    pub fn new(limit: usize) -> Self {
        let free = limit.max(1);
        InFlightLimit {
            inner: Arc::new((
                Mutex::new(State {
                    free,
                    in_flight: 0,
                    peak: 0,
                }),
                Condvar::new(),
            )),
        }
    }

    pub fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        let (lock, cvar) = &*self.inner;
        {
            let mut state = lock.lock().unwrap();
            while state.free == 0 {
                state = cvar.wait(state).unwrap();
            }
            state.free -= 1;
            state.in_flight += 1;
            state.peak = state.peak.max(state.in_flight);
        }
        let _release = Release(self);
        f()
    }

    /// Highest number of simultaneous calls observed so far.
    pub fn peak(&self) -> usize {
        self.inner.0.lock().unwrap().peak
    }
}

struct Release<'a>(&'a InFlightLimit);

impl Drop for Release<'_> {
    fn drop(&mut self) {
        let (lock, cvar) = &*self.0.inner;
        let mut state = lock.lock().unwrap();
        state.free += 1;
        state.in_flight -= 1;
        cvar.notify_one();
    }
}

/// Wraps a backend so that every call goes through a shared [`InFlightLimit`].
pub struct Limited<B> {
    backend: B,
    limit: InFlightLimit,
}

impl<B: ChatBackend> Limited<B> {
    pub fn new(backend: B, limit: InFlightLimit) -> Self {
        Limited { backend, limit }
    }

    pub fn limit(&self) -> &InFlightLimit {
        &self.limit
    }

    pub fn inner(&self) -> &B {
        &self.backend
    }
}

impl<B: ChatBackend> ChatBackend for Limited<B> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        self.limit.run(|| self.backend.complete(request))
    }

    fn describe(&self) -> String {
        self.backend.describe()
    }
}
