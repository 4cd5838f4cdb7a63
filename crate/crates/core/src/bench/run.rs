//! Benchmark driver: one update thread applying batches back to back while
//! reader threads issue uniformly random reads in one of three modes.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::stats::{mean, percentile_sorted};
use crate::clock::now_ns;
use crate::cplds::{Cplds, CpldsError, Reader};
use crate::graph::{EdgeBatch, Graph, VertexId};
use crate::oracle::audit::ratio;
use crate::oracle::history::{BatchRecord, ReadMode, ReadRecord};
use crate::oracle::peel::exact_coreness;
use crate::params::{LevelParams, ParamsError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Cplds(#[from] CpldsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: ReadMode,
    pub batch_size: usize,
    pub update_workers: usize,
    pub reader_threads: usize,
    pub delta: f64,
    pub lambda: f64,
    pub seed: u64,
    /// Keep read and batch records in the output.
    pub record: bool,
    /// Minimum spacing between a reader's consecutive reads, slept off; 0 reads
    /// flat out.
    pub read_interval_ns: u64,
    /// Each reader stops after issuing this many reads.
    pub max_reads_per_reader: usize,
    /// Exact coreness is computed at every `truth_every`-th batch boundary.
    pub truth_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: ReadMode::Cplds,
            batch_size: 10_000,
            update_workers: 4,
            reader_threads: 4,
            delta: 0.2,
            lambda: 9.0,
            seed: 1,
            record: false,
            read_interval_ns: 0,
            max_reads_per_reader: 1_000_000,
            truth_every: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.update_workers == 0 || self.reader_threads == 0 {
            return bad("thread counts must be at least 1");
        }
        if self.truth_every == 0 {
            return bad("truth interval must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub mode: String,
    pub batch_size: usize,
    pub workers: usize,
    pub readers: usize,
    pub reads: u64,
    pub mean_ns: f64,
    pub p99_ns: u64,
    pub p9999_ns: u64,
    /// Completed reads per second of wall time.
    pub read_tput: f64,
    pub batches: usize,
    pub upd_mean_ms: f64,
    pub upd_max_ms: f64,
    /// Read error against the better of the boundaries each read overlaps.
    pub err_mean: f64,
    pub err_max: f64,
    /// Reads that entered the error statistics.
    pub err_reads: u64,
    /// Error of the settled estimates at each sampled boundary.
    pub boundary_err_mean: f64,
    pub boundary_err_max: f64,
    pub max_retries: u32,
}

pub const CSV_HEADER: &str =
    "mode,batch_size,workers,readers,mean_ns,p99_ns,p9999_ns,read_tput,upd_mean_ms,upd_max_ms,err_mean,err_max";

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{},{:.1},{},{},{:.1},{:.3},{:.3},{:.6},{:.6}",
            self.mode,
            self.batch_size,
            self.workers,
            self.readers,
            self.mean_ns,
            self.p99_ns,
            self.p9999_ns,
            self.read_tput,
            self.upd_mean_ms,
            self.upd_max_ms,
            self.err_mean,
            self.err_max
        )
        .unwrap();
        s
    }
}

pub struct RunOutput {
    pub report: MetricsReport,
    /// Filled when `record` is set.
    pub batches: Vec<BatchRecord>,
    /// Filled when `record` is set.
    pub reads: Vec<ReadRecord>,
    pub final_levels: Vec<u32>,
    pub final_graph: Graph,
}

/// Queue in front of the levels for synchronous reads: reads issued while a
/// batch runs are parked in arrival order and served when it finishes.
struct SyncGate {
    state: Mutex<Gate>,
    cv: Condvar,
}

#[derive(Default)]
struct Gate {
    active: bool,
    inflight: usize,
    queue: Vec<(u64, VertexId)>,
    served: Vec<ReadRecord>,
}

impl SyncGate {
    fn new() -> Self {
        Self { state: Mutex::new(Gate::default()), cv: Condvar::new() }
    }

    /// Live read when no batch runs; otherwise parks the read and returns
    /// `None`. The reader does not wait for a parked read.
    fn read(&self, reader: &Reader, v: VertexId, t0: u64) -> Option<u32> {
        let mut g = self.state.lock().unwrap();
        if g.active {
            g.queue.push((t0, v));
            return None;
        }
        g.inflight += 1;
        drop(g);
        let level = reader.read_live(v).level;
        let mut g = self.state.lock().unwrap();
        g.inflight -= 1;
        if g.inflight == 0 {
            self.cv.notify_all();
        }
        Some(level)
    }

    /// Closes the gate and waits for in-flight live reads to finish.
    fn close(&self) {
        let mut g = self.state.lock().unwrap();
        g.active = true;
        while g.inflight > 0 {
            g = self.cv.wait(g).unwrap();
        }
    }

    /// Serves parked reads in order against the settled levels and reopens.
    fn open(&self, reader: &Reader) {
        let mut g = self.state.lock().unwrap();
        let queue = std::mem::take(&mut g.queue);
        for (t0, v) in queue {
            let level = reader.read_live(v).level;
            let t1 = now_ns().max(t0 + 1);
            g.served.push(ReadRecord { vertex: v, invoke_ts: t0, return_ts: t1, level, mode: ReadMode::Sync });
        }
        g.active = false;
    }

    fn into_served(self) -> Vec<ReadRecord> {
        self.state.into_inner().unwrap().served
    }
}

struct ReaderLog {
    latencies: Vec<u64>,
    reads: Vec<ReadRecord>,
    max_retries: u32,
}

fn reader_loop(
    cfg: &RunConfig,
    idx: usize,
    reader: &Reader,
    gate: &SyncGate,
    stop: &AtomicBool,
) -> ReaderLog {
    let n = reader.num_vertices() as VertexId;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(idx as u64 + 1);
    let cap = cfg.max_reads_per_reader;
    let mut log = ReaderLog { latencies: Vec::with_capacity(cap.min(1 << 20)), reads: Vec::with_capacity(cap.min(1 << 20)), max_retries: 0 };
    let mut issued = 0;
    while !stop.load(Ordering::Relaxed) && issued < cap {
        let v = rng.gen_range(0..n);
        issued += 1;
        let t0 = now_ns();
        let level = match cfg.mode {
            ReadMode::Cplds => {
                let r = reader.read(v);
                log.max_retries = log.max_retries.max(r.retries);
                Some(r.level)
            }
            ReadMode::NonSync => Some(reader.read_live(v).level),
            ReadMode::Sync => gate.read(reader, v, t0),
        };
        if let Some(level) = level {
            let t1 = now_ns().max(t0 + 1);
            log.latencies.push(t1 - t0);
            log.reads.push(ReadRecord { vertex: v, invoke_ts: t0, return_ts: t1, level, mode: cfg.mode });
        }
        if cfg.read_interval_ns > 0 {
            let now = now_ns();
            if now < t0 + cfg.read_interval_ns {
                std::thread::sleep(std::time::Duration::from_nanos(t0 + cfg.read_interval_ns - now));
            }
        }
    }
    log
}

/// Runs `batches` on a fresh structure over `n` vertices with concurrent
/// readers, then scores every read against exact coreness at the batch
/// boundaries it overlaps.
pub fn run(cfg: &RunConfig, n: usize, batches: &[EdgeBatch]) -> Result<RunOutput, BenchError> {
    cfg.validate()?;
    let params = LevelParams::new(n, cfg.delta, cfg.lambda)?;
    let mut cplds = Cplds::new(params.clone(), cfg.update_workers, cfg.mode == ReadMode::Cplds)?;
    let reader = cplds.reader();
    let gate = SyncGate::new();
    let stop = AtomicBool::new(false);

    // truth[p] / settled[p]: exact coreness and estimates after p batches
    let mut truth: Vec<Option<Vec<u32>>> = vec![Some(vec![0; n])];
    let mut settled: Vec<Option<Vec<u32>>> = vec![Some(vec![0; n])];
    let mut records = Vec::with_capacity(batches.len());
    let mut upd_ms = Vec::with_capacity(batches.len());

    let wall = Instant::now();
    let (logs, result) = std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.reader_threads)
            .map(|i| {
                let (reader, gate, stop) = (reader.clone(), &gate, &stop);
                s.spawn(move || reader_loop(cfg, i, &reader, gate, stop))
            })
            .collect();
        let result = (|| -> Result<(), BenchError> {
            for (i, b) in batches.iter().enumerate() {
                let t0 = Instant::now();
                if cfg.mode == ReadMode::Sync {
                    gate.close();
                }
                let out = cplds.apply(b);
                upd_ms.push(t0.elapsed().as_secs_f64() * 1e3);
                if cfg.mode == ReadMode::Sync {
                    gate.open(&reader);
                }
                records.push(out?.record);
                let p = i + 1;
                if p % cfg.truth_every == 0 || p == batches.len() {
                    truth.push(Some(exact_coreness(cplds.graph())));
                    settled.push(Some(cplds.levels()));
                } else {
                    truth.push(None);
                    settled.push(None);
                }
            }
            Ok(())
        })();
        stop.store(true, Ordering::SeqCst);
        let logs: Vec<ReaderLog> = handles.into_iter().map(|h| h.join().expect("reader panicked")).collect();
        (logs, result)
    });
    let wall_s = wall.elapsed().as_secs_f64();
    result?;

    let mut latencies: Vec<u64> = Vec::new();
    let mut reads: Vec<ReadRecord> = Vec::new();
    let mut max_retries = 0;
    for log in logs {
        latencies.extend(log.latencies);
        reads.extend(log.reads);
        max_retries = max_retries.max(log.max_retries);
    }
    for r in gate.into_served() {
        latencies.push(r.return_ts - r.invoke_ts);
        reads.push(r);
    }
    latencies.sort_unstable();

    let mut report = MetricsReport {
        mode: cfg.mode.to_string(),
        batch_size: cfg.batch_size,
        workers: cfg.update_workers,
        readers: cfg.reader_threads,
        reads: reads.len() as u64,
        mean_ns: mean(&latencies),
        p99_ns: if latencies.is_empty() { 0 } else { percentile_sorted(&latencies, 0.99) },
        p9999_ns: if latencies.is_empty() { 0 } else { percentile_sorted(&latencies, 0.9999) },
        read_tput: reads.len() as f64 / wall_s.max(1e-9),
        batches: batches.len(),
        upd_mean_ms: if upd_ms.is_empty() { 0.0 } else { upd_ms.iter().sum::<f64>() / upd_ms.len() as f64 },
        upd_max_ms: upd_ms.iter().copied().fold(0.0, f64::max),
        max_retries,
        ..Default::default()
    };
    score_reads(&mut report, &params, &records, &truth, &reads);
    score_boundaries(&mut report, &params, &truth, &settled);

    let final_levels = cplds.levels();
    let final_graph = cplds.graph().clone();
    if !cfg.record {
        records.clear();
        reads = Vec::new();
    }
    Ok(RunOutput { report, batches: records, reads, final_levels, final_graph })
}

fn score_reads(
    report: &mut MetricsReport,
    params: &LevelParams,
    batches: &[BatchRecord],
    truth: &[Option<Vec<u32>>],
    reads: &[ReadRecord],
) {
    let begins: Vec<u64> = batches.iter().map(|b| b.begin_ts).collect();
    let ends: Vec<u64> = batches.iter().map(|b| b.end_ts).collect();
    let (mut sum, mut max, mut count) = (0.0, 0.0f64, 0u64);
    for r in reads {
        let p_lo = ends.partition_point(|&e| e < r.invoke_ts);
        let p_hi = begins.partition_point(|&b| b <= r.return_ts);
        let est = params.estimate(r.level);
        let mut best: Option<f64> = None;
        let mut all_sampled = true;
        let mut any_positive = false;
        for t in &truth[p_lo..=p_hi] {
            let Some(t) = t else {
                all_sampled = false;
                break;
            };
            let k = t[r.vertex as usize];
            any_positive |= k > 0;
            let e = ratio(est, k.max(1));
            best = Some(best.map_or(e, |b: f64| b.min(e)));
        }
        if !all_sampled || !any_positive {
            continue;
        }
        let e = best.unwrap();
        sum += e;
        max = max.max(e);
        count += 1;
    }
    report.err_mean = if count > 0 { sum / count as f64 } else { 0.0 };
    report.err_max = max;
    report.err_reads = count;
}

fn score_boundaries(
    report: &mut MetricsReport,
    params: &LevelParams,
    truth: &[Option<Vec<u32>>],
    settled: &[Option<Vec<u32>>],
) {
    let (mut sum, mut max, mut count) = (0.0, 0.0f64, 0u64);
    for (t, l) in truth.iter().zip(settled) {
        let (Some(t), Some(l)) = (t, l) else { continue };
        for (&k, &lv) in t.iter().zip(l) {
            if k == 0 {
                continue;
            }
            let e = ratio(params.estimate(lv), k);
            sum += e;
            max = max.max(e);
            count += 1;
        }
    }
    report.boundary_err_mean = if count > 0 { sum / count as f64 } else { 0.0 };
    report.boundary_err_max = max;
}
