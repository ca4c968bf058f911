//! Bounded worker pool over an indexed list of jobs.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

/// Applies `f` to every item on at most `threads` workers.
///
/// Results come back in input order, so output never depends on scheduling.
/// On error, the error of the lowest failing index is returned.
pub fn map<I: Sync, R: Send, E: Send>(
    threads: usize,
    items: &[I],
    f: impl Fn(&I) -> Result<R, E> + Sync,
) -> Result<Vec<R>, E> {
    let workers = threads.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<R, E>>>> = items.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every job ran")).collect()
}
