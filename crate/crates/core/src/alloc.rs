//! Allocation helpers for large, randomly accessed buffers.

/// Empty vector with room for `capacity` items. On Linux the buffer is
/// advised onto transparent huge pages: training visits large buffers in
/// random order, and with 4 KiB pages nearly every visit misses the TLB.
pub(crate) fn with_huge_capacity<S>(capacity: usize) -> Vec<S> {
    let v = Vec::with_capacity(capacity);
    #[cfg(target_os = "linux")]
    {
        const HUGE_PAGE: usize = 1 << 21;
        let start = v.as_ptr() as usize;
        let end = start + v.capacity() * std::mem::size_of::<S>();
        let (lo, hi) = (start.next_multiple_of(HUGE_PAGE), end / HUGE_PAGE * HUGE_PAGE);
        if hi > lo {
            // SAFETY: the range lies inside this vector's unused allocation;
            // the advice only changes how the kernel backs it.
            unsafe { libc::madvise(lo as *mut libc::c_void, hi - lo, libc::MADV_HUGEPAGE) };
        }
    }
    v
}
