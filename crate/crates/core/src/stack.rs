/// Stack reserved for the recursive checkers. Derivation paths can get long
/// on adversarial inputs; the memory is only committed as it is touched.
const CHECKER_STACK_BYTES: usize = 1 << 30;

/// Runs `f` on a scoped thread with a large stack and returns its result,
/// re-raising any panic on the caller's thread.
pub(crate) fn on_big_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    std::thread::scope(|scope| {
        let handle = std::thread::Builder::new()
            .name("sessub-checker".into())
            .stack_size(CHECKER_STACK_BYTES)
            .spawn_scoped(scope, f)
            .expect("failed to spawn checker thread");
        match handle.join() {
            Ok(r) => r,
            Err(panic) => std::panic::resume_unwind(panic),
        }
    })
}
