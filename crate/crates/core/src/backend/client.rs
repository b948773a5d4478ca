use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::{
    AdapterKind, AdapterRef, AdapterStatus, Backend, BackendError, Health, InpaintJob, TrainJob,
    PROTOCOL_VERSION,
};
use crate::imaging::{BinaryImage, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    /// Delay before the second attempt; doubles each time.
    pub base_delay: Duration,
}

pub type InpaintResult = Result<Vec<RasterImage>, BackendError>;

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_millis(250),
        }
    }
}

impl RetryPolicy {
    pub fn delay_before(&self, attempt: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(attempt.saturating_sub(1))
    }
}

/// Number of pixels outside `mask` where `out` differs from `grid`.
pub fn unmasked_changes(
    grid: &RasterImage,
    mask: &BinaryImage,
    out: &RasterImage,
) -> Result<usize, BackendError> {
    if out.dimensions() != grid.dimensions() {
        return Err(BackendError::InvalidResponse(format!(
            "canvas is {:?}, request was {:?}",
            out.dimensions(),
            grid.dimensions()
        )));
    }
    let out = out.convert(grid.format());
    let spp = grid.format().samples_per_pixel();
    let w = grid.width() as usize;
    Ok(grid
        .pixels()
        .chunks_exact(spp)
        .zip(out.pixels().chunks_exact(spp))
        .enumerate()
        .filter(|(i, (a, b))| a != b && !mask.get((i % w) as u32, (i / w) as u32))
        .count())
}

/// Retrying, validating front end over any [`Backend`].
#[derive(Clone)]
pub struct BackendClient {
    backend: Arc<dyn Backend>,
    retry: RetryPolicy,
    max_in_flight: usize,
    poll_interval: Duration,
    poll_timeout: Duration,
}

impl BackendClient {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self {
            backend,
            retry: RetryPolicy::default(),
            max_in_flight: 4,
            poll_interval: Duration::from_secs(5),
            poll_timeout: Duration::from_secs(6 * 3600),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    pub fn with_polling(mut self, interval: Duration, timeout: Duration) -> Self {
        self.poll_interval = interval;
        self.poll_timeout = timeout;
        self
    }

    pub fn backend(&self) -> &Arc<dyn Backend> {
        &self.backend
    }

    fn retrying<T>(&self, f: impl Fn() -> Result<T, BackendError>) -> Result<T, BackendError> {
        let attempts = self.retry.attempts.max(1);
        let mut attempt = 1;
        loop {
            match f() {
                Err(e) if e.is_retryable() => {
                    if attempt >= attempts {
                        return Err(BackendError::RetriesExhausted {
                            attempts,
                            last: Box::new(e),
                        });
                    }
                    std::thread::sleep(self.retry.delay_before(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    /// Health probe; refuses backends speaking another protocol version.
    pub fn check_health(&self) -> Result<Health, BackendError> {
        let h = self.retrying(|| self.backend.health())?;
        if h.version != PROTOCOL_VERSION {
            return Err(BackendError::VersionMismatch {
                expected: PROTOCOL_VERSION.into(),
                found: h.version,
            });
        }
        if !h.ok {
            return Err(BackendError::Server {
                status: 503,
                message: "backend reports not ok".into(),
            });
        }
        Ok(h)
    }

    pub fn adapter(&self, id: &str) -> Result<AdapterRef, BackendError> {
        self.retrying(|| self.backend.adapter(id))
    }

    /// Submits a job and waits until the adapter leaves `pending`.
    pub fn train(&self, job: &TrainJob) -> Result<AdapterRef, BackendError> {
        job.validate()?;
        let mut adapter = self.retrying(|| self.backend.submit_train(job))?;
        let started = Instant::now();
        while adapter.status == AdapterStatus::Pending {
            if started.elapsed() > self.poll_timeout {
                return Err(BackendError::AdapterNotReady {
                    id: adapter.id,
                    status: AdapterStatus::Pending,
                });
            }
            std::thread::sleep(self.poll_interval);
            adapter = self.adapter(&adapter.id)?;
        }
        match adapter.status {
            AdapterStatus::Ready => Ok(adapter),
            status => Err(BackendError::AdapterNotReady {
                id: adapter.id,
                status,
            }),
        }
    }

    /// A ready adapter of the expected kind.
    pub fn require_kind(&self, id: &str, kind: AdapterKind) -> Result<AdapterRef, BackendError> {
        let a = self.adapter(id)?;
        if a.kind != kind {
            return Err(BackendError::KindMismatch {
                id: id.to_owned(),
                expected: kind,
                found: a.kind,
            });
        }
        if a.status != AdapterStatus::Ready {
            return Err(BackendError::AdapterNotReady {
                id: id.to_owned(),
                status: a.status,
            });
        }
        Ok(a)
    }

    /// Completed canvases; every response is checked for unmasked edits.
    pub fn inpaint(&self, job: &InpaintJob) -> Result<Vec<RasterImage>, BackendError> {
        job.validate()?;
        let images = self.retrying(|| self.backend.inpaint(job))?;
        if images.is_empty() {
            return Err(BackendError::InvalidResponse("no images returned".into()));
        }
        for img in &images {
            let changed = unmasked_changes(&job.grid, &job.mask, img)?;
            if changed > 0 {
                return Err(BackendError::UnmaskedPixelsChanged { changed });
            }
        }
        Ok(images)
    }

    /// Runs jobs with at most `max_in_flight` outstanding; results keep job
    /// order.
    pub fn inpaint_many(&self, jobs: &[InpaintJob]) -> Vec<InpaintResult> {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<InpaintResult>>> = Mutex::new(vec![None; jobs.len()]);
        let workers = self.max_in_flight.min(jobs.len());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(job) = jobs.get(i) else { break };
                    let r = self.inpaint(job);
                    slots.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .unwrap_or_else(|p| p.into_inner())
            .into_iter()
            .map(|r| r.expect("every job ran"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::mock::MockBackend;
    use crate::backend::{MockTransform, TrainSample};
    use std::sync::atomic::AtomicU32;

    /// Fails the first `failures` inpaint calls with a retryable error and
    /// optionally scribbles outside the mask.
    struct Flaky {
        inner: MockBackend,
        failures: u32,
        calls: AtomicU32,
        scribble: bool,
        version: &'static str,
    }

    impl Flaky {
        fn new(failures: u32) -> Self {
            Self {
                inner: MockBackend::new(MockTransform::Invert),
                failures,
                calls: AtomicU32::new(0),
                scribble: false,
                version: PROTOCOL_VERSION,
            }
        }
    }

    impl Backend for Flaky {
        fn health(&self) -> Result<Health, BackendError> {
            let mut h = self.inner.health()?;
            h.version = self.version.into();
            Ok(h)
        }
        fn submit_train(&self, job: &TrainJob) -> Result<AdapterRef, BackendError> {
            self.inner.submit_train(job)
        }
        fn adapter(&self, id: &str) -> Result<AdapterRef, BackendError> {
            self.inner.adapter(id)
        }
        fn inpaint(&self, job: &InpaintJob) -> Result<Vec<RasterImage>, BackendError> {
            if self.calls.fetch_add(1, Ordering::SeqCst) < self.failures {
                return Err(BackendError::Server {
                    status: 503,
                    message: "busy".into(),
                });
            }
            let mut out = self.inner.inpaint(job)?;
            if self.scribble {
                out[0].put_rgb(0, 0, [7, 7, 7]);
            }
            Ok(out)
        }
    }

    fn fast(b: Flaky) -> (Arc<Flaky>, BackendClient) {
        let b = Arc::new(b);
        let c = BackendClient::new(b.clone()).with_retry(RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(1),
        });
        (b, c)
    }

    fn adapter(c: &BackendClient, kind: AdapterKind) -> String {
        c.train(&TrainJob::new(
            kind,
            vec![TrainSample {
                image: RasterImage::from_fn_gray(4, 4, |_, _| 1),
                prompt: "p".into(),
            }],
        ))
        .unwrap()
        .id
    }

    fn job(id: &str) -> InpaintJob {
        InpaintJob {
            grid: RasterImage::from_fn_gray(8, 8, |x, y| (x * 9 + y) as u8),
            mask: BinaryImage::from_fn(8, 8, |x, y| x >= 4 && y >= 4),
            prompt: "p".into(),
            adapter_id: id.into(),
            seed: 0,
            samples: 1,
        }
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(100),
        };
        assert_eq!(p.delay_before(1), Duration::from_millis(100));
        assert_eq!(p.delay_before(2), Duration::from_millis(200));
    }

    #[test]
    fn retries_then_succeeds() {
        let (b, c) = fast(Flaky::new(2));
        let id = adapter(&c, AdapterKind::Svat);
        assert!(c.inpaint(&job(&id)).is_ok());
        assert_eq!(b.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn exhausts_after_three() {
        let (b, c) = fast(Flaky::new(5));
        let id = adapter(&c, AdapterKind::Svat);
        assert!(matches!(
            c.inpaint(&job(&id)),
            Err(BackendError::RetriesExhausted { attempts: 3, .. })
        ));
        assert_eq!(b.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn permanent_errors_are_not_retried() {
        let (b, c) = fast(Flaky::new(0));
        assert!(matches!(
            c.inpaint(&job("missing")),
            Err(BackendError::UnknownAdapter(_))
        ));
        assert_eq!(b.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn unmasked_edit_is_rejected() {
        let mut f = Flaky::new(0);
        f.scribble = true;
        let (_, c) = fast(f);
        let id = adapter(&c, AdapterKind::Svat);
        assert!(matches!(
            c.inpaint(&job(&id)),
            Err(BackendError::UnmaskedPixelsChanged { changed: 1 })
        ));
    }

    #[test]
    fn version_and_kind_checks() {
        let mut f = Flaky::new(0);
        f.version = "2";
        let (_, c) = fast(f);
        assert!(matches!(
            c.check_health(),
            Err(BackendError::VersionMismatch { .. })
        ));
        let id = adapter(&c, AdapterKind::Svat);
        assert!(c.require_kind(&id, AdapterKind::Svat).is_ok());
        assert!(matches!(
            c.require_kind(&id, AdapterKind::Avat),
            Err(BackendError::KindMismatch { .. })
        ));
    }

    #[test]
    fn many_keeps_order() {
        let (_, c) = fast(Flaky::new(0));
        let c = c.with_max_in_flight(3);
        let id = adapter(&c, AdapterKind::Svat);
        let jobs: Vec<_> = (0..7)
            .map(|s| {
                let mut j = job(&id);
                j.grid = RasterImage::from_fn_gray(8, 8, move |x, _| (x + s) as u8);
                j
            })
            .collect();
        let out = c.inpaint_many(&jobs);
        for (j, r) in jobs.iter().zip(out) {
            let img = &r.unwrap()[0];
            assert_eq!(
                img.crop(0, 0, 4, 8).unwrap(),
                j.grid.crop(0, 0, 4, 8).unwrap()
            );
        }
    }
}
