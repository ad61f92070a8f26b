//! Deterministic data-parallel map. The worker count is capped by the
//! TROPMA_THREADS environment variable (default: available
//! parallelism); results always come back in input order.

pub fn thread_cap() -> usize {
    if let Ok(v) = std::env::var("TROPMA_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync,
{
    let workers = thread_cap().min(items.len().max(1));
    if workers <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let mut slots: Vec<Option<U>> = Vec::with_capacity(items.len());
    slots.resize_with(items.len(), || None);
    let queue: Vec<(usize, T)> = items.into_iter().enumerate().collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let queue = std::sync::Mutex::new(
        queue.into_iter().map(Some).collect::<Vec<_>>(),
    );
    let slots_mutex = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let item = {
                    let mut q = queue.lock().unwrap();
                    if idx >= q.len() {
                        return;
                    }
                    q[idx].take()
                };
                let Some((i, item)) = item else { return };
                let out = f(item);
                slots_mutex.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled every slot")).collect()
}
