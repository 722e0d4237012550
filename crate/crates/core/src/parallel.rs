use rayon::prelude::*;

/// Maps `f` over `items`, preserving order. `threads <= 1` runs inline on the
/// caller's thread; otherwise a scoped pool of that size is used. Results are
/// identical either way because each item is computed independently.
pub(crate) fn ordered_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running serially");
            items.iter().map(f).collect()
        }
    }
}

/// Thread count when none is given. Not serialized: results never depend on it.
pub(crate) fn serial() -> usize {
    1
}
