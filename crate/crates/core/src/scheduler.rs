//! Head-worker execution of the sweep on in-process threads.
//!
//! Workers ask the coordinator for work, receive a batch of points or a kill
//! message, and answer with one outcome per point. Each worker also keeps its
//! serialized results in a memory buffer that is spilled to its own
//! `step2_worker<k>.part` file whenever the buffer fills, and once more on
//! shutdown. The spill files are merged afterwards, keeping each point's
//! latest attempt.

use std::collections::{BTreeMap, VecDeque};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SweepError;
use crate::paramhom::{
    run_caught, run_sweep_with, Job, JobOutcome, PointExecutor, PointResult, Step1Result, SweepContext, SweepResult,
};
use crate::poly::ParameterPoint;
use crate::store::{parse_point_records, write_point_record};

pub const DEFAULT_BUFFER_BYTES: usize = 64 << 20;
pub const PARTIAL_MARKER: &str = "PARTIAL";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub index: usize,
    pub attempt: usize,
    pub track_secs: f64,
    pub serialize_secs: f64,
}

/// Serialized results waiting to be written.
#[derive(Debug)]
pub struct ResultBuffer {
    pending: Vec<u8>,
    threshold: usize,
    flushes: usize,
}

impl ResultBuffer {
    pub fn new(threshold: usize) -> Self {
        Self {
            pending: Vec::new(),
            threshold,
            flushes: 0,
        }
    }

    pub fn bytes(&self) -> usize {
        self.pending.len()
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Number of non-empty flushes so far.
    pub fn flushes(&self) -> usize {
        self.flushes
    }

    /// Appends `data` and flushes if the threshold is reached. Returns
    /// whether a flush happened.
    pub fn push<W: Write + ?Sized>(&mut self, data: &[u8], sink: &mut W) -> io::Result<bool> {
        self.pending.extend_from_slice(data);
        if self.pending.len() >= self.threshold {
            flush_buffer(self, sink)?;
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

/// Writes everything pending in a single call and clears the buffer.
pub fn flush_buffer<W: Write + ?Sized>(buf: &mut ResultBuffer, sink: &mut W) -> io::Result<()> {
    if buf.pending.is_empty() {
        return Ok(());
    }
    sink.write_all(&buf.pending)?;
    sink.flush()?;
    buf.pending.clear();
    buf.flushes += 1;
    Ok(())
}

pub fn spill_path(dir: &Path, worker: usize) -> PathBuf {
    dir.join(format!("step2_worker{worker}.part"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParallelConfig {
    pub workers: usize,
    /// Points per batch; `None` picks `max(1, points / (8 * workers))`.
    pub batch_size: Option<usize>,
    pub buffer_bytes: usize,
    /// Where spill files go; `None` keeps results in memory only.
    pub spill_dir: Option<PathBuf>,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            batch_size: None,
            buffer_bytes: DEFAULT_BUFFER_BYTES,
            spill_dir: None,
        }
    }
}

impl ParallelConfig {
    pub fn batch_size_for(&self, points: usize) -> usize {
        self.batch_size
            .unwrap_or_else(|| (points / (8 * self.workers.max(1))).max(1))
            .max(1)
    }
}

enum ToHead {
    Ready(usize),
    Outcome(Box<JobOutcome>),
}

enum ToWorker {
    Batch(Vec<Job>),
    Kill,
}

/// Sink for one worker's spill file, opened on first write.
struct Spill {
    path: Option<PathBuf>,
    file: Option<File>,
}

impl Write for Spill {
    fn write(&mut self, data: &[u8]) -> io::Result<usize> {
        let Some(path) = &self.path else {
            return Ok(data.len());
        };
        if self.file.is_none() {
            self.file = Some(OpenOptions::new().create(true).append(true).open(path)?);
        }
        self.file.as_mut().unwrap().write(data)
    }

    fn flush(&mut self) -> io::Result<()> {
        match self.file.as_mut() {
            Some(f) => f.flush(),
            None => Ok(()),
        }
    }
}

fn worker_loop(
    id: usize,
    ctx: &SweepContext,
    to_head: mpsc::Sender<ToHead>,
    inbox: mpsc::Receiver<ToWorker>,
    buffer_bytes: usize,
    spill_dir: Option<&Path>,
) -> io::Result<()> {
    let mut buf = ResultBuffer::new(buffer_bytes);
    let mut sink = Spill {
        path: spill_dir.map(|d| spill_path(d, id)),
        file: None,
    };
    let mut text = String::new();
    loop {
        if to_head.send(ToHead::Ready(id)).is_err() {
            break;
        }
        let jobs = match inbox.recv() {
            Ok(ToWorker::Batch(jobs)) => jobs,
            Ok(ToWorker::Kill) | Err(_) => break,
        };
        let mut crashed: Option<String> = None;
        for job in &jobs {
            if let Some(msg) = &crashed {
                let _ = to_head.send(ToHead::Outcome(Box::new(JobOutcome {
                    index: job.index,
                    result: Err(format!("batch aborted: {msg}")),
                    timing: None,
                })));
                continue;
            }
            let (result, track_secs) = run_caught(ctx, job);
            let mut serialize_secs = 0.0;
            match &result {
                Ok(r) => {
                    let start = Instant::now();
                    text.clear();
                    write_point_record(&mut text, r);
                    buf.push(text.as_bytes(), &mut sink)?;
                    serialize_secs = start.elapsed().as_secs_f64();
                }
                Err(msg) => crashed = Some(msg.clone()),
            }
            let timing = TimingRecord {
                index: job.index,
                attempt: job.attempt,
                track_secs,
                serialize_secs,
            };
            let _ = to_head.send(ToHead::Outcome(Box::new(JobOutcome {
                index: job.index,
                result,
                timing: Some(timing),
            })));
        }
    }
    flush_buffer(&mut buf, &mut sink)
}

/// Runs jobs on a pool of worker threads fed by a single coordinator.
#[derive(Debug, Clone)]
pub struct ThreadedExecutor {
    pub config: ParallelConfig,
}

impl ThreadedExecutor {
    pub fn new(config: ParallelConfig) -> Self {
        Self { config }
    }
}

impl PointExecutor for ThreadedExecutor {
    fn execute(&mut self, ctx: &Arc<SweepContext>, jobs: Vec<Job>, batch_size: usize) -> Result<Vec<JobOutcome>, SweepError> {
        let expected = jobs.len();
        let mut queue: VecDeque<Vec<Job>> = VecDeque::new();
        let mut it = jobs.into_iter().peekable();
        while it.peek().is_some() {
            queue.push_back(it.by_ref().take(batch_size.max(1)).collect());
        }
        let workers = self.config.workers.max(1);
        let spill_dir = self.config.spill_dir.as_deref();
        if let Some(dir) = spill_dir {
            fs::create_dir_all(dir).map_err(|e| SweepError::io(dir, e))?;
        }
        let buffer_bytes = self.config.buffer_bytes;
        let (to_head, from_workers) = mpsc::channel::<ToHead>();
        let mut outcomes = Vec::with_capacity(expected);
        let worker_results: Vec<io::Result<()>> = thread::scope(|s| {
            let mut inboxes = Vec::with_capacity(workers);
            let mut handles = Vec::with_capacity(workers);
            for id in 0..workers {
                let (tx, rx) = mpsc::channel::<ToWorker>();
                inboxes.push(tx);
                let to_head = to_head.clone();
                let ctx: &SweepContext = ctx;
                handles.push(s.spawn(move || worker_loop(id, ctx, to_head, rx, buffer_bytes, spill_dir)));
            }
            drop(to_head);
            let mut killed = 0;
            while killed < workers {
                let Ok(msg) = from_workers.recv() else { break };
                match msg {
                    ToHead::Ready(id) => match queue.pop_front() {
                        Some(batch) => {
                            if inboxes[id].send(ToWorker::Batch(batch)).is_err() {
                                killed += 1;
                            }
                        }
                        None => {
                            let _ = inboxes[id].send(ToWorker::Kill);
                            killed += 1;
                        }
                    },
                    ToHead::Outcome(o) => outcomes.push(*o),
                }
            }
            // A worker that stopped early (sink failure) leaves its messages behind.
            while let Ok(msg) = from_workers.try_recv() {
                if let ToHead::Outcome(o) = msg {
                    outcomes.push(*o);
                }
            }
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(io::Error::other("worker thread panicked"))))
                .collect()
        });
        for r in worker_results {
            if let Err(e) = r {
                let dir = spill_dir.map(Path::to_path_buf).unwrap_or_default();
                if spill_dir.is_some() {
                    let _ = fs::write(dir.join(PARTIAL_MARKER), format!("sweep aborted: {e}\n"));
                }
                return Err(SweepError::io(dir, e));
            }
        }
        if outcomes.len() != expected {
            return Err(SweepError::Invalid(format!(
                "expected {expected} outcomes, received {}",
                outcomes.len()
            )));
        }
        outcomes.sort_by_key(|o| o.index);
        Ok(outcomes)
    }
}

/// Parallel sweep with retry rounds; results are independent of `workers`.
pub fn run_parallel<R: Rng + ?Sized>(
    ctx: &Arc<SweepContext>,
    r1: &Step1Result,
    points: &[ParameterPoint],
    max_retries: usize,
    config: &ParallelConfig,
    rng: &mut R,
) -> Result<SweepResult, SweepError> {
    if config.workers == 0 {
        return Err(SweepError::Invalid("need at least one worker".into()));
    }
    let batch = config.batch_size_for(points.len());
    let mut exec = ThreadedExecutor::new(config.clone());
    run_sweep_with(&mut exec, ctx, r1, points, max_retries, batch, rng)
}

/// Reads every spill file in `dir`, keeping the latest attempt per point.
pub fn merge_spill_files(dir: &Path) -> Result<BTreeMap<usize, PointResult>, SweepError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| SweepError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("step2_worker") && n.ends_with(".part"))
        })
        .collect();
    files.sort();
    let mut merged: BTreeMap<usize, PointResult> = BTreeMap::new();
    for path in files {
        let text = fs::read_to_string(&path).map_err(|e| SweepError::io(&path, e))?;
        let records = parse_point_records(text.lines(), 1)
            .map_err(|e| SweepError::Invalid(format!("{}: {e}", path.display())))?;
        for r in records {
            match merged.get(&r.index) {
                Some(old) if old.retries_used > r.retries_used => {}
                _ => {
                    merged.insert(r.index, r);
                }
            }
        }
    }
    Ok(merged)
}

/// Final per-point results: spilled records where present, in-memory ones
/// for points that never produced a record (crashed twice).
pub fn collect_results(dir: &Path, sweep: &SweepResult) -> Result<Vec<PointResult>, SweepError> {
    let mut merged = merge_spill_files(dir)?;
    Ok(sweep
        .point_results
        .iter()
        .map(|r| match merged.remove(&r.index) {
            Some(m) if m.retries_used >= r.retries_used && r.diagnostic.is_none() => m,
            _ => r.clone(),
        })
        .collect())
}

pub fn remove_spill_files(dir: &Path, workers: usize) -> Result<(), SweepError> {
    for k in 0..workers {
        let p = spill_path(dir, k);
        match fs::remove_file(&p) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(SweepError::io(p, e)),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flush_after_sixth_append() {
        let mut buf = ResultBuffer::new(1024);
        let mut sink: Vec<u8> = Vec::new();
        let rec = [b'x'; 200];
        let mut flushed_at = Vec::new();
        for i in 1..=10 {
            if buf.push(&rec, &mut sink).unwrap() {
                flushed_at.push(i);
            }
            assert!(buf.bytes() <= buf.threshold());
        }
        assert_eq!(flushed_at, vec![6]);
        assert_eq!(sink.len(), 1200);
        flush_buffer(&mut buf, &mut sink).unwrap();
        assert_eq!(sink.len(), 2000);
        assert_eq!(buf.bytes(), 0);
        assert_eq!(buf.flushes(), 2);
    }

    #[test]
    fn empty_flush_is_noop() {
        struct Refuse;
        impl Write for Refuse {
            fn write(&mut self, _: &[u8]) -> io::Result<usize> {
                Err(io::Error::other("should not be called"))
            }
            fn flush(&mut self) -> io::Result<()> {
                Err(io::Error::other("should not be called"))
            }
        }
        let mut buf = ResultBuffer::new(10);
        flush_buffer(&mut buf, &mut Refuse).unwrap();
        assert_eq!(buf.flushes(), 0);
    }

    /// Counts `write` calls to check one write per flush.
    struct CountingSink {
        calls: usize,
        data: Vec<u8>,
    }

    impl Write for CountingSink {
        fn write(&mut self, d: &[u8]) -> io::Result<usize> {
            self.calls += 1;
            self.data.extend_from_slice(d);
            Ok(d.len())
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn single_write_per_flush() {
        let mut buf = ResultBuffer::new(usize::MAX);
        let mut sink = CountingSink { calls: 0, data: Vec::new() };
        for _ in 0..5 {
            buf.push(b"abc", &mut sink).unwrap();
        }
        flush_buffer(&mut buf, &mut sink).unwrap();
        assert_eq!(sink.calls, 1);
        assert_eq!(sink.data, b"abcabcabcabcabc");
    }

    #[test]
    fn default_batch_size() {
        let cfg = ParallelConfig { workers: 4, ..Default::default() };
        assert_eq!(cfg.batch_size_for(100), 3);
        assert_eq!(cfg.batch_size_for(5), 1);
        let cfg = ParallelConfig { batch_size: Some(1000), ..Default::default() };
        assert_eq!(cfg.batch_size_for(5), 1000);
    }
}
