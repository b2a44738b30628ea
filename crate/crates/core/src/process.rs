//! Child processes with a wall-clock limit, capped output capture and
//! whole-group kill. Each child leads its own process group, so anything it
//! forks dies with it.

use std::io::{self, Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::PathBuf;
use std::process::{Command, ExitStatus, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub argv: Vec<String>,
    pub cwd: Option<PathBuf>,
    pub env: Vec<(String, String)>,
    pub stdin: Vec<u8>,
    pub timeout: Duration,
    /// Per-stream capture cap; the rest is read and discarded.
    pub max_output: usize,
    /// Applied as RLIMIT_NPROC in the child.
    pub max_processes: Option<u64>,
}

impl ProcessSpec {
    pub fn new(argv: Vec<String>, timeout: Duration) -> Self {
        ProcessSpec {
            argv,
            cwd: None,
            env: Vec::new(),
            stdin: Vec::new(),
            timeout,
            max_output: usize::MAX,
            max_processes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Code(i32),
    Signal(i32),
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct ProcessOutput {
    pub exit: Exit,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub stdout_truncated: bool,
    pub stderr_truncated: bool,
    pub wall: Duration,
}

impl ProcessOutput {
    pub fn success(&self) -> bool {
        self.exit == Exit::Code(0)
    }
}

fn capture<R: Read + Send + 'static>(mut r: R, cap: usize) -> thread::JoinHandle<(Vec<u8>, bool)> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut truncated = false;
        let mut buf = [0u8; 16 * 1024];
        loop {
            match r.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => {
                    let room = cap.saturating_sub(kept.len());
                    if n > room {
                        truncated = true;
                    }
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(_) => break,
            }
        }
        (kept, truncated)
    })
}

fn kill_group(pgid: i32) {
    // SAFETY: plain syscall; a stale group id only yields ESRCH.
    unsafe {
        libc::killpg(pgid, libc::SIGKILL);
    }
}

/// Runs `spec` to completion or until its timeout, then kills the whole
/// process group. Errors only when the process cannot be spawned.
pub fn run(spec: &ProcessSpec) -> io::Result<ProcessOutput> {
    let (prog, args) = spec
        .argv
        .split_first()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "empty argv"))?;
    let mut cmd = Command::new(prog);
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(dir) = &spec.cwd {
        cmd.current_dir(dir);
    }
    for (k, v) in &spec.env {
        cmd.env(k, v);
    }
    let nproc = spec.max_processes;
    // SAFETY: only async-signal-safe calls between fork and exec.
    unsafe {
        cmd.pre_exec(move || {
            if libc::setpgid(0, 0) != 0 {
                return Err(io::Error::last_os_error());
            }
            if let Some(n) = nproc {
                let lim = libc::rlimit {
                    rlim_cur: n as libc::rlim_t,
                    rlim_max: n as libc::rlim_t,
                };
                libc::setrlimit(libc::RLIMIT_NPROC, &lim);
            }
            Ok(())
        });
    }
    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let pgid = child.id() as i32;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = spec.stdin.clone();
    let writer = thread::spawn(move || {
        // a child that exits without reading closes the pipe; that is fine
        let _ = stdin.write_all(&input);
    });
    let out = capture(child.stdout.take().expect("piped stdout"), spec.max_output);
    let err = capture(child.stderr.take().expect("piped stderr"), spec.max_output);

    let (tx, rx) = mpsc::channel::<io::Result<ExitStatus>>();
    let waiter = thread::spawn(move || {
        let _ = tx.send(child.wait());
    });
    let (status, timed_out) = match rx.recv_timeout(spec.timeout) {
        Ok(status) => (status, false),
        Err(_) => {
            kill_group(pgid);
            (rx.recv().unwrap_or_else(|_| Err(io::Error::other("waiter vanished"))), true)
        }
    };
    let wall = start.elapsed();
    // leftover grandchildren would keep the pipes open
    kill_group(pgid);
    let _ = waiter.join();
    let _ = writer.join();
    let (stdout, stdout_truncated) = out.join().unwrap_or_default();
    let (stderr, stderr_truncated) = err.join().unwrap_or_default();
    let status = status?;
    let exit = if timed_out {
        Exit::TimedOut
    } else if let Some(code) = status.code() {
        Exit::Code(code)
    } else {
        Exit::Signal(status.signal().unwrap_or(0))
    };
    Ok(ProcessOutput {
        exit,
        stdout,
        stderr,
        stdout_truncated,
        stderr_truncated,
        wall,
    })
}
