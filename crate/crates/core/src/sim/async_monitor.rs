//! Monitor on its own thread. The worker is the only writer of the buffer
//! bank; after each frame it publishes a complete copy under a lock, so the
//! gate never sees a half-written frame.

use std::sync::mpsc::{self, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crate::monitor::{evaluate, update_buffers, BufferBank, HazardReport, MonitorConfig};
use crate::prediction::predict;
use crate::trajectory::Trajectory;
use crate::world::BevSnapshot;

pub struct MonitorJob {
    pub curr: BevSnapshot,
    pub prev: BevSnapshot,
    pub trajectory: Trajectory,
    pub in_takeover: bool,
}

enum Msg {
    Job(Box<MonitorJob>),
    ResetRecovery,
}

#[derive(Clone)]
struct Published {
    bank: BufferBank,
    report: Option<HazardReport>,
}

type Shared = Arc<(Mutex<Published>, Condvar)>;

pub struct AsyncMonitor {
    tx: Option<Sender<Msg>>,
    shared: Shared,
    worker: Option<JoinHandle<()>>,
}

impl AsyncMonitor {
    pub fn spawn(cfg: MonitorConfig) -> Self {
        let shared: Shared = Arc::new((
            Mutex::new(Published {
                bank: BufferBank::new(&cfg),
                report: None,
            }),
            Condvar::new(),
        ));
        let (tx, rx) = mpsc::channel::<Msg>();
        let out = Arc::clone(&shared);
        let worker = std::thread::spawn(move || {
            let settings = cfg.prediction();
            let mut bank = BufferBank::new(&cfg);
            let mut report = None;
            for msg in rx {
                match msg {
                    Msg::Job(job) => {
                        // A trajectory the predictor rejects leaves the frame unrecorded.
                        let Ok(boxes) = predict(&job.curr, &job.prev, &job.trajectory, &settings) else {
                            continue;
                        };
                        let r = evaluate(&boxes, &job.curr, &bank, &cfg);
                        if update_buffers(&r, &mut bank, job.in_takeover, &cfg).is_err() {
                            continue;
                        }
                        report = Some(r);
                    }
                    Msg::ResetRecovery => bank.reset_recovery(),
                }
                let (lock, cv) = &*out;
                *lock.lock().expect("monitor lock poisoned") = Published {
                    bank: bank.clone(),
                    report: report.clone(),
                };
                cv.notify_all();
            }
        });
        Self {
            tx: Some(tx),
            shared,
            worker: Some(worker),
        }
    }

    pub fn submit(&self, job: MonitorJob) {
        if let Some(tx) = &self.tx {
            let _ = tx.send(Msg::Job(Box::new(job)));
        }
    }

    pub fn reset_recovery(&self) {
        if let Some(tx) = &self.tx {
            let _ = tx.send(Msg::ResetRecovery);
        }
    }

    /// Latest published bank and report, waiting at most `wait` for the
    /// report of `frame`.
    pub fn latest(&self, frame: u64, wait: Duration) -> (BufferBank, Option<HazardReport>) {
        let (lock, cv) = &*self.shared;
        let deadline = Instant::now() + wait;
        let mut guard = lock.lock().expect("monitor lock poisoned");
        while guard.report.as_ref().is_none_or(|r| r.frame < frame) {
            let now = Instant::now();
            if now >= deadline {
                break;
            }
            guard = cv.wait_timeout(guard, deadline - now).expect("monitor lock poisoned").0;
        }
        (guard.bank.clone(), guard.report.clone())
    }
}

impl Drop for AsyncMonitor {
    fn drop(&mut self) {
        self.tx.take();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}
