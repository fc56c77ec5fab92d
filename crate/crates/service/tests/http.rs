mod common;

use std::net::TcpListener;
use std::process::{Child, Command, Stdio};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use common::{quad, quad_tdl, EXAMPLE_TDL};
use gbbo_core::{parse_tdl, Configuration, Value};
use gbbo_service::client::{AnonymizingClient, HttpClient, Wire, WireTap};
use gbbo_service::http::BackgroundServer;
use gbbo_service::{OptimizerApi, Service, ServiceError, UpdateRequest};
use proptest::prelude::*;

fn server() -> (tempfile::TempDir, BackgroundServer) {
    let dir = tempfile::tempdir().unwrap();
    let svc = Arc::new(Service::single(dir.path()).unwrap());
    let srv = BackgroundServer::start(svc, "127.0.0.1:0").unwrap();
    (dir, srv)
}

#[test]
fn full_loop_over_http() {
    let (_d, srv) = server();
    let c = HttpClient::new(srv.base_url());
    assert!(c.health().unwrap().ok);
    let id = c.create_task(&quad_tdl(8, "async", 1, 3)).unwrap();
    c.register(&id, "w").unwrap();
    for _ in 0..8 {
        let s = c.suggest(&id, "w").unwrap();
        c.update(&id, &UpdateRequest::new(s.trial_id, vec![quad(&s.config)], vec![], 0.5)).unwrap();
    }
    let h = c.history(&id).unwrap();
    assert_eq!(h.completed(), 8);
    assert_eq!(c.suggest(&id, "w").unwrap_err(), ServiceError::Finished);
    let advice = c.extrapolate(&id).unwrap();
    assert_eq!(advice.n, 8);
}

#[test]
fn errors_keep_their_status_over_http() {
    let (_d, srv) = server();
    let c = HttpClient::new(srv.base_url());
    let err = c.create_task("{ not json").unwrap_err();
    assert_eq!(err.status(), 400);
    assert!(matches!(err, ServiceError::Tdl(_)));
    assert!(matches!(c.register("missing", "w").unwrap_err(), ServiceError::UnknownTask(_)));

    let id = c.create_task(EXAMPLE_TDL).unwrap();
    assert!(matches!(c.suggest(&id, "w").unwrap_err(), ServiceError::NotRegistered(_)));
    c.register(&id, "w").unwrap();
    let s = c.suggest(&id, "w").unwrap();
    assert_eq!(c.early_stop(&id, 77, 1.0).unwrap_err(), ServiceError::UnknownTrial(77));
    assert!(!c.early_stop(&id, s.trial_id, 1.0).unwrap());
    assert_eq!(c.extrapolate(&id).unwrap_err().status(), 425);
    c.update(&id, &UpdateRequest::new(s.trial_id, vec![1.0], vec![-1.0], 0.1)).unwrap();
    let dup = c.update(&id, &UpdateRequest::new(s.trial_id, vec![1.0], vec![-1.0], 0.1)).unwrap_err();
    assert_eq!(dup.status(), 409);
}

#[test]
fn raw_wire_statuses() {
    let (_d, srv) = server();
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let url = |p: &str| format!("{}{p}", srv.base_url());
    let r = agent.post(url("/v1/task")).send(EXAMPLE_TDL).unwrap();
    assert_eq!(r.status().as_u16(), 200);
    let r = agent.post(url("/v1/task")).send("{").unwrap();
    assert_eq!(r.status().as_u16(), 400);
    let r = agent.get(url("/v1/task/nope/history")).call().unwrap();
    assert_eq!(r.status().as_u16(), 404);
    let r = agent.get(url("/v1/health")).call().unwrap();
    assert_eq!(r.status().as_u16(), 200);
}

fn tapped_client(base: &str) -> (HttpClient, Arc<Mutex<Vec<u8>>>) {
    let wire = Arc::new(Mutex::new(Vec::new()));
    let sink = wire.clone();
    let tap: WireTap = Arc::new(move |_: Wire, bytes: &[u8]| {
        let mut w = sink.lock().unwrap();
        w.extend_from_slice(bytes);
        w.push(b'\n');
    });
    (HttpClient::new(base).with_tap(tap), wire)
}

fn contains(hay: &[u8], needle: &str) -> bool {
    hay.windows(needle.len()).any(|w| w == needle.as_bytes())
}

fn secret_tdl(names: &[String], choices: &[String]) -> String {
    format!(
        r#"{{"parameter": {{
            "{}": {{"type": "float", "bound": [-3, 7]}},
            "{}": {{"type": "int", "bound": [10, 20]}},
            "{}": {{"type": "cat", "choice": ["{}", "{}"], "default": "{}"}}}},
          "condition": {{"c": {{"type": "equal", "parent": "{}", "child": "{}", "value": "{}"}}}},
          "number_of_trials": 6, "random_seed": 1}}"#,
        names[0], names[1], names[2], choices[0], choices[1], choices[0], names[2], names[0], choices[1]
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn anonymized_traffic_never_names_parameters(
        names in proptest::collection::btree_set("zq[a-z]{6,10}", 3),
        choices in proptest::collection::btree_set("zv[a-z]{6,10}", 2),
    ) {
        let names: Vec<String> = names.into_iter().collect();
        let choices: Vec<String> = choices.into_iter().collect();
        let (_d, srv) = server();
        let (http, wire) = tapped_client(&srv.base_url());
        let client = AnonymizingClient::new(http);
        let tdl = secret_tdl(&names, &choices);
        let space = parse_tdl(&tdl).unwrap().space;

        let id = client.create_task(&tdl).unwrap();
        client.register(&id, "worker").unwrap();
        for _ in 0..6 {
            let s = client.suggest(&id, "worker").unwrap();
            // Decoded locally into the real space.
            prop_assert!(space.is_valid(&s.config), "{:?}", s.config);
            let x = s.config.get(&names[1]).and_then(Value::as_f64).unwrap();
            client.update(&id, &UpdateRequest::new(s.trial_id, vec![x], vec![], 0.1)).unwrap();
        }
        let h = client.history(&id).unwrap();
        prop_assert!(h.log.iter().all(|l| space.is_valid(&l.config) || l.config == Configuration::new()));
        client.extrapolate(&id).unwrap();

        let bytes = wire.lock().unwrap().clone();
        prop_assert!(contains(&bytes, "param1"));
        for secret in names.iter().chain(&choices) {
            prop_assert!(!contains(&bytes, secret), "'{}' leaked", secret);
        }
        // The plain client would have leaked them.
        let (plain, wire) = tapped_client(&srv.base_url());
        plain.create_task(&tdl).unwrap();
        let bytes = wire.lock().unwrap().clone();
        prop_assert!(contains(&bytes, &names[0]));
    }
}

struct Killed(Child);

impl Drop for Killed {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn serve_binary_answers_requests() {
    let dir = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let child = Command::new(env!("CARGO_BIN_EXE_gbbo-serve"))
        .args(["--db", dir.path().to_str().unwrap(), "--addr", &addr])
        .env("GBBO_HEARTBEAT_S", "0.5")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let _guard = Killed(child);
    let c = HttpClient::new(format!("http://{addr}"));
    let t0 = Instant::now();
    while c.health().is_err() {
        assert!(t0.elapsed() < Duration::from_secs(30), "server did not start");
        std::thread::sleep(Duration::from_millis(50));
    }
    let id = c.create_task(EXAMPLE_TDL).unwrap();
    c.register(&id, "w").unwrap();
    let s = c.suggest(&id, "w").unwrap();
    c.update(&id, &UpdateRequest::new(s.trial_id, vec![1.0], vec![0.0], 0.1)).unwrap();
    assert_eq!(c.history(&id).unwrap().completed(), 1);
    // Heartbeats keep the only server alive well past the timeout scale.
    std::thread::sleep(Duration::from_millis(1200));
    assert!(c.health().unwrap().ok);
    assert!(dir.path().join("master.json").exists());
    assert!(dir.path().join("tasks").join(&id).join("log.jsonl").exists());
}
