//! Client for a remote sampling service, plus a local mock of it.
//!
//! The protocol is one JSON request, `POST {endpoint}/solve`, whose body is
//! the QUBO JSON object extended with `num_reads` and `time_limit_ms`. The
//! reply is `{"samples": [{"assignment": [..], "energy": e, "occurrences": m}]}`.
//! Every returned energy is recomputed locally; the service is not trusted.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{better_sample, SolveResult, SolverConfig};
use crate::error::{Error, Result};
use crate::qubo::{QuboJson, QuboProblem, Sample};

/// Reported and recomputed energies may differ by at most this much.
pub const ENERGY_CHECK_TOLERANCE: f64 = 1e-6;

const DEFAULT_TIME_LIMIT_MS: u64 = 10_000;
// allowance on top of the solve time limit for transport
const TRANSPORT_SLACK: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    #[serde(flatten)]
    pub problem: QuboJson,
    pub num_reads: usize,
    pub time_limit_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSample {
    pub assignment: Vec<u8>,
    pub energy: f64,
    pub occurrences: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResponse {
    pub samples: Vec<WireSample>,
}

/// Sends `q` to `endpoint` and returns the best sample after validation.
pub fn solve_remote(q: &QuboProblem, endpoint: &str, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let start = Instant::now();
    let time_limit_ms = cfg.time_budget_ms.unwrap_or(DEFAULT_TIME_LIMIT_MS);
    let request = SolveRequest {
        problem: q.clone().into(),
        num_reads: cfg.num_reads,
        time_limit_ms,
    };
    let url = format!("{}/solve", endpoint.trim_end_matches('/'));
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(time_limit_ms) + TRANSPORT_SLACK))
        .build()
        .into();
    let mut response = agent
        .post(&url)
        .send_json(&request)
        .map_err(|e| Error::Network(format!("{url}: {e}")))?;
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| Error::Network(format!("{url}: {e}")))?;
    let parsed: SolveResponse = serde_json::from_str(&body)
        .map_err(|e| Error::MalformedResponse(e.to_string()))?;
    let best = validate(q, parsed.samples)?;
    Ok(SolveResult {
        energy_history: vec![best.0.energy],
        best: best.0,
        evaluations: best.1,
        wall_time: start.elapsed(),
        truncated: false,
    })
}

/// Checks every sample and returns the best one with the sample count.
pub fn validate(q: &QuboProblem, samples: Vec<WireSample>) -> Result<(Sample, u64)> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let count = samples.len() as u64;
    let mut best: Option<Sample> = None;
    for (index, w) in samples.into_iter().enumerate() {
        q.check_assignment(&w.assignment)
            .map_err(|e| Error::MalformedResponse(format!("sample {index}: {e}")))?;
        let computed = q.evaluate(&w.assignment);
        // written so that a NaN energy counts as a mismatch
        let close = (w.energy - computed).abs() <= ENERGY_CHECK_TOLERANCE;
        if !close {
            return Err(Error::EnergyMismatch {
                index,
                reported: w.energy,
                computed,
            });
        }
        let s = Sample {
            assignment: w.assignment,
            energy: computed,
        };
        if best.as_ref().is_none_or(|b| better_sample(&s, b)) {
            best = Some(s);
        }
    }
    Ok((best.expect("samples is non-empty"), count))
}

/// A local stand-in for the sampling service, for tests and demos.
pub mod mock {
    use std::sync::Arc;
    use std::thread::JoinHandle;

    use tiny_http::{Header, Response, Server};

    use super::{SolveRequest, SolveResponse, WireSample};
    use crate::error::{Error, Result};
    use crate::qubo::QuboProblem;
    use crate::solvers::solve_exhaustive;

    #[derive(Debug, Clone, PartialEq)]
    pub enum MockBehavior {
        /// Reply with the exhaustive optimum.
        Exhaustive,
        /// The exhaustive optimum with its energy off by one.
        CorruptEnergy,
        /// An empty sample list.
        Empty,
        /// A body that is not JSON.
        Malformed,
        /// This exact body.
        Canned(String),
    }

    /// Serves `POST /solve` on an ephemeral localhost port until dropped.
    pub struct MockServer {
        server: Arc<Server>,
        url: String,
        worker: Option<JoinHandle<()>>,
    }

    impl MockServer {
        pub fn start(behavior: MockBehavior) -> Result<Self> {
            let server = Server::http("127.0.0.1:0")
                .map_err(|e| Error::Network(format!("mock server: {e}")))?;
            let addr = server
                .server_addr()
                .to_ip()
                .ok_or_else(|| Error::Network("mock server has no IP address".into()))?;
            let server = Arc::new(server);
            let worker = {
                let server = Arc::clone(&server);
                std::thread::spawn(move || serve(&server, &behavior))
            };
            Ok(Self {
                server,
                url: format!("http://{addr}"),
                worker: Some(worker),
            })
        }

        pub fn url(&self) -> &str {
            &self.url
        }
    }

    impl Drop for MockServer {
        fn drop(&mut self) {
            self.server.unblock();
            if let Some(w) = self.worker.take() {
                let _ = w.join();
            }
        }
    }

    fn serve(server: &Server, behavior: &MockBehavior) {
        for mut request in server.incoming_requests() {
            let mut body = String::new();
            let (status, reply) = if request.url() != "/solve" {
                (404, "not found".to_string())
            } else if request.as_reader().read_to_string(&mut body).is_err() {
                (400, "unreadable body".to_string())
            } else {
                match answer(&body, behavior) {
                    Ok(reply) => (200, reply),
                    Err(e) => (400, e.to_string()),
                }
            };
            let header = Header::from_bytes("Content-Type", "application/json")
                .expect("static header is valid");
            let _ = request.respond(
                Response::from_string(reply)
                    .with_status_code(status)
                    .with_header(header),
            );
        }
    }

    fn answer(body: &str, behavior: &MockBehavior) -> Result<String> {
        let request: SolveRequest = serde_json::from_str(body)?;
        let q = QuboProblem::try_from(request.problem)?;
        let optimum = |shift: f64| -> Result<String> {
            let best = solve_exhaustive(&q)?.best;
            let response = SolveResponse {
                samples: vec![WireSample {
                    assignment: best.assignment,
                    energy: best.energy + shift,
                    occurrences: request.num_reads as u64,
                }],
            };
            Ok(serde_json::to_string(&response)?)
        };
        match behavior {
            MockBehavior::Exhaustive => optimum(0.0),
            MockBehavior::CorruptEnergy => optimum(1.0),
            MockBehavior::Empty => Ok(r#"{"samples":[]}"#.to_string()),
            MockBehavior::Malformed => Ok("this is not json".to_string()),
            MockBehavior::Canned(text) => Ok(text.clone()),
        }
    }
}
