//! Bridge integration: fake device server sessions, drive behaviour, and
//! failure handling over real local sockets.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::time::{Duration, Instant};

use sillsim_core::bridge::{drive, serve_device, CommandResult, DriveOptions, ErrCode};
use sillsim_core::{Command, ControllerConfig, CurtainState};

fn default_device() -> CurtainState {
    CurtainState::new(70, 2.0)
}

fn quick_options() -> DriveOptions {
    DriveOptions {
        backoff: Duration::from_millis(5),
        reply_timeout: Duration::from_secs(2),
        ..DriveOptions::default()
    }
}

/// Client helper: send one line, read one reply line.
struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(addr: &str) -> Client {
        let stream = TcpStream::connect(addr).expect("connect to fake device");
        stream
            .set_read_timeout(Some(Duration::from_secs(2)))
            .unwrap();
        Client {
            writer: stream.try_clone().unwrap(),
            reader: BufReader::new(stream),
        }
    }

    fn send(&mut self, line: &str) -> String {
        self.writer.write_all(line.as_bytes()).unwrap();
        self.writer.flush().unwrap();
        let mut reply = String::new();
        self.reader.read_line(&mut reply).unwrap();
        reply
    }
}

#[test]
fn hello_echoes_initial_opening() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let mut client = Client::connect(&server.local_addr().to_string());
    assert_eq!(client.send("HELLO v1\n"), "OK 70\n");
    server.shutdown();
}

#[test]
fn set_then_get_reads_back_the_settled_opening() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let mut client = Client::connect(&server.local_addr().to_string());
    client.send("HELLO v1\n");
    assert_eq!(client.send("SET 66\n"), "OK 66\n");
    assert_eq!(client.send("GET\n"), "OK 66\n");
    server.shutdown();
}

#[test]
fn set_before_hello_is_a_state_error() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let mut client = Client::connect(&server.local_addr().to_string());
    assert_eq!(client.send("SET 66\n"), "ERR STATE\n");
    assert_eq!(client.send("GET\n"), "ERR STATE\n");
    server.shutdown();
}

#[test]
fn out_of_range_set_is_a_range_error() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let mut client = Client::connect(&server.local_addr().to_string());
    client.send("HELLO v1\n");
    assert_eq!(client.send("SET 101\n"), "ERR RANGE\n");
    assert_eq!(client.send("SET -1\n"), "ERR RANGE\n");
    // Device state is untouched by the refusals.
    assert_eq!(client.send("GET\n"), "OK 70\n");
    server.shutdown();
}

#[test]
fn malformed_lines_get_parse_errors_without_killing_the_session() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let mut client = Client::connect(&server.local_addr().to_string());
    assert_eq!(client.send("what even\n"), "ERR PARSE\n");
    let long_line = format!("{}\n", "Z".repeat(200));
    assert_eq!(client.send(&long_line), "ERR PARSE\n");
    assert_eq!(client.send("HELLO v1\n"), "OK 70\n");
    assert_eq!(client.send("HELLO v1\n"), "ERR STATE\n");
    server.shutdown();
}

#[test]
fn unsupported_version_is_refused() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let mut client = Client::connect(&server.local_addr().to_string());
    assert_eq!(client.send("HELLO v2\n"), "ERR STATE\n");
    server.shutdown();
}

#[test]
fn busy_endpoint_is_a_startup_error() {
    let holder = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = holder.local_addr().unwrap().to_string();
    let err = serve_device(default_device(), &addr);
    assert!(err.is_err());
}

#[test]
fn concurrent_sessions_serialize_on_the_device() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let addr = server.local_addr().to_string();
    let mut handles = Vec::new();
    for worker in 0..8 {
        let addr = addr.clone();
        handles.push(std::thread::spawn(move || {
            let mut client = Client::connect(&addr);
            // Another session may already have moved the device; HELLO just
            // has to echo a sane opening.
            let hello = client.send("HELLO v1\n");
            let echoed: i64 = hello
                .trim_end()
                .strip_prefix("OK ")
                .expect("HELLO reply")
                .parse()
                .unwrap();
            assert!((0..=100).contains(&echoed));
            for i in 0..50 {
                let pct = (worker * 7 + i * 3) % 101;
                let reply = client.send(&format!("SET {pct}\n"));
                assert_eq!(reply, format!("OK {pct}\n"), "worker {worker} iter {i}");
            }
        }));
    }
    for h in handles {
        h.join().unwrap();
    }
    let final_opening = server.opening();
    assert!((0..=100).contains(&final_opening));
    server.shutdown();
}

#[test]
fn drive_with_flat_readings_sends_nothing() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let addr = server.local_addr().to_string();
    let readings = vec![40.0; 40];
    let log = drive(&quick_options(), readings, &addr).unwrap();
    server.shutdown();
    assert_eq!(log.records.len(), 40);
    assert!(log.sent_targets().is_empty());
    assert!(log
        .records
        .iter()
        .all(|r| r.command == Command::Hold && r.result == CommandResult::NotSent));
}

#[test]
fn drive_turns_a_rise_into_one_set() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let addr = server.local_addr().to_string();
    let log = drive(&quick_options(), vec![40.00, 40.20], &addr).unwrap();
    assert_eq!(log.sent_targets(), vec![66]);
    assert_eq!(log.records[1].result, CommandResult::Acknowledged(66));
    assert_eq!(server.opening(), 66);
    server.shutdown();
}

#[test]
fn drive_seeds_its_believed_opening_from_hello() {
    // Device stands at 54, not the controller's configured 70: the first
    // close must step from the device's truth.
    let server = serve_device(CurtainState::new(54, 2.0), "127.0.0.1:0").unwrap();
    let addr = server.local_addr().to_string();
    let log = drive(&quick_options(), vec![40.00, 40.10], &addr).unwrap();
    assert_eq!(log.sent_targets(), vec![50]);
    server.shutdown();
}

/// Stub device that greets properly but refuses every SET with ERR RANGE and
/// reports opening 70 on GET.
fn spawn_rejecting_stub() -> (std::net::SocketAddr, std::thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = std::thread::spawn(move || {
        let Ok((stream, _)) = listener.accept() else { return };
        let mut writer = stream.try_clone().unwrap();
        let reader = BufReader::new(stream);
        for line in reader.lines() {
            let Ok(line) = line else { break };
            let reply = if line.starts_with("HELLO") {
                "OK 70\n"
            } else if line.starts_with("SET") {
                "ERR RANGE\n"
            } else if line.starts_with("GET") {
                "OK 70\n"
            } else {
                break;
            };
            if writer.write_all(reply.as_bytes()).is_err() {
                break;
            }
        }
    });
    (addr, handle)
}

#[test]
fn drive_rolls_back_to_the_device_confirmed_opening_on_err() {
    let (addr, handle) = spawn_rejecting_stub();
    let readings = vec![40.00, 40.20, 40.40];
    let log = drive(&quick_options(), readings, &addr.to_string()).unwrap();
    drop(handle);

    // Tick 1 rises in band: SET 66 refused, controller re-synced to 70.
    assert_eq!(
        log.records[1].result,
        CommandResult::Rejected {
            code: ErrCode::Range,
            device_opening: 70
        }
    );
    // Tick 2 rises again: having rolled back, the close starts from 70
    // again, not from a phantom 66.
    assert_eq!(log.records[2].command, Command::SetOpening(66));
}

#[test]
fn drive_reconnects_after_a_dropped_connection() {
    // First server handles the handshake and one command, then its sessions
    // are severed; a replacement on the same port picks the loop back up.
    let server_a = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let addr = server_a.local_addr().to_string();

    let drive_addr = addr.clone();
    let driver = std::thread::spawn(move || {
        let options = DriveOptions {
            controller: ControllerConfig {
                tick_s: 0.3,
                ..ControllerConfig::default()
            },
            real_time: true,
            ..quick_options()
        };
        let readings = vec![40.00, 40.20, 40.40, 40.60];
        drive(&options, readings, &drive_addr).unwrap()
    });

    // Ticks run at t = 0, 0.3, 0.6, 0.9 s. Wait for the first SET to land on
    // server A, then swap servers in the gap before the second one.
    let deadline = Instant::now() + Duration::from_secs(5);
    while server_a.opening() != 66 {
        assert!(Instant::now() < deadline, "first SET never reached server A");
        std::thread::sleep(Duration::from_millis(10));
    }
    server_a.shutdown();
    let server_b = serve_device(CurtainState::new(66, 2.0), &addr).unwrap();

    let log = driver.join().unwrap();
    let sets: Vec<_> = log
        .records
        .iter()
        .filter(|r| matches!(r.command, Command::SetOpening(_)))
        .collect();
    assert_eq!(sets.len(), 3, "three rising ticks should actuate: {log:?}");
    // Every command eventually got through, by first try or by reconnect.
    assert!(
        sets.iter()
            .all(|r| matches!(r.result, CommandResult::Acknowledged(_))),
        "{log:?}"
    );
    // Reading history survived the reconnect: deltas kept triggering and the
    // closes continued 66 -> 62 -> 58 on the replacement device.
    assert_eq!(server_b.opening(), 58);
    server_b.shutdown();
}

#[test]
fn drive_logs_failures_when_the_device_stays_gone() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let addr = server.local_addr().to_string();
    server.shutdown(); // nothing listens anymore

    let err = drive(&quick_options(), vec![40.0, 40.2], &addr);
    assert!(err.is_err(), "startup needs a reachable device");
}

#[test]
fn real_time_drive_paces_ticks() {
    let server = serve_device(default_device(), "127.0.0.1:0").unwrap();
    let addr = server.local_addr().to_string();
    let options = DriveOptions {
        controller: ControllerConfig {
            tick_s: 0.05,
            ..ControllerConfig::default()
        },
        real_time: true,
        ..quick_options()
    };
    let started = Instant::now();
    let log = drive(&options, vec![40.0, 40.0, 40.0], &addr).unwrap();
    let elapsed = started.elapsed();
    server.shutdown();
    assert_eq!(log.records.len(), 3);
    // Two inter-tick gaps at 50 ms each, scheduler jitter aside.
    assert!(elapsed >= Duration::from_millis(100), "elapsed {elapsed:?}");
    assert!(elapsed < Duration::from_secs(2), "elapsed {elapsed:?}");
}
