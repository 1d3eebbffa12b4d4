//! Bridge to an external solver speaking the JSON file formats over a pipe.
//!
//! The command runs under `sh -c`, receives a `SystemFile` on stdin and must
//! print a `SolutionFile` on stdout. Returned points are checked against the
//! system locally before they are trusted.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::io::{SolutionFile, SystemFile};
use crate::numeric::residual_ok;
use crate::polynomial::{SparseSystem, TorusPoint};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

/// Scaled residual a returned point must meet to be accepted.
pub const ACCEPT_TOL: f64 = 1e-6;

/// Runs `command` on `system` and returns the validated torus points.
pub fn solve_external(command: &str, system: &SparseSystem, tolerance: f64, timeout: Duration) -> Result<Vec<TorusPoint>> {
    let failure = |what: String| Error::SubprocessFailure(format!("`{command}`: {what}"));
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| failure(e.to_string()))?;

    let input = SystemFile::from_system(system).to_json();
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let writer = thread::spawn(move || {
        // a child that exits without reading closes the pipe; that is not our error
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let mut stderr = child.stderr.take().expect("stderr is piped");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait().map_err(|e| failure(e.to_string()))? {
            break status;
        }
        if start.elapsed() > timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(failure(format!("timed out after {:?}", timeout)));
        }
        thread::sleep(Duration::from_millis(5));
    };
    let _ = writer.join();
    let output = reader.join().expect("reader thread").map_err(|e| failure(e.to_string()))?;
    let errors = err_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(failure(format!("exited with {status}: {}", errors.trim())));
    }

    let file = SolutionFile::from_json(&output).map_err(|e| failure(format!("invalid output: {e}")))?;
    let mut points = Vec::with_capacity(file.solutions.len());
    for entry in &file.solutions {
        if entry.point.len() != system.n() {
            return Err(failure(format!("point of dimension {} for a system in {} variables", entry.point.len(), system.n())));
        }
        let coords: Vec<_> = entry.point.iter().map(|p| num_complex::Complex64::new(p[0], p[1])).collect();
        if coords.iter().any(|z| !(z.norm() > tolerance) || !z.re.is_finite() || !z.im.is_finite()) {
            continue;
        }
        if residual_ok(system.residual(&coords), system.magnitude(&coords), ACCEPT_TOL) {
            points.push(TorusPoint(coords));
        }
    }
    Ok(points)
}
